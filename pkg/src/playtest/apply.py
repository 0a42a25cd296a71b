"""Tactic application: match live contexts and concretize tactics into gestures.

The swipe-endpoint solver inverts the demo-side property extraction: given a
sampled chord length, a direction parameter (line slope or parabola leading
coefficient) and the live origin/target centroids, it finds the swipe end
point satisfying the distance constraint, disambiguating the two geometric
solutions with the demo's mean displacement direction.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field

from .infer import DirectionKind, DirectionParam, Rule, SubmatrixPattern, Tactic, TacticSet
from .scene import Context, IconCategory
from .trace import Action, Gesture, GestureKind, emit_trace

log = logging.getLogger(__name__)

CHORD_TOL = 1e-3
BISECT_ITERS = 200
RESAMPLE_TRIES = 20


class ApplyError(Exception):
    pass


class NoConvergence(ApplyError):
    pass


class DegenerateTarget(ApplyError):
    pass


class NoApplicablePattern(ApplyError):
    pass


class MissingInstance(ApplyError):
    pass


@dataclass
class PlannedAction:
    gestures: list[Gesture] = field(default_factory=list)
    tactic_id: str = ""
    rationale: Rule = Rule.R1


def match_context(
    context: Context, tactic_set: TacticSet, rng: random.Random
) -> Tactic | None:
    """The tactic whose signature equals the context's, if any.

    Signature equality covers category-set and grid-flag equality; several
    matches are resolved uniformly at random.
    """
    matches = [t for t in tactic_set.tactics if t.signature == context.signature]
    if not matches:
        return None
    return matches[0] if len(matches) == 1 else rng.choice(matches)


def _dot(a: tuple[float, float], b: tuple[float, float]) -> float:
    return a[0] * b[0] + a[1] * b[1]


def _solve_linear(origin, k: float, dist: float, hint) -> tuple[float, float]:
    dx = dist / math.sqrt(1.0 + k * k)
    plus = (dx, dx * k)
    minus = (-dx, -dx * k)
    delta = plus if _dot(plus, hint) >= _dot(minus, hint) else minus
    return (origin[0] + delta[0], origin[1] + delta[1])


def _solve_sinx(origin, sinx: float, dist: float, hint) -> tuple[float, float]:
    dy = dist * sinx
    dx = dist * math.sqrt(max(0.0, 1.0 - sinx * sinx))
    if hint[0] < 0:  # horizontal sign from the hint; ties keep +x
        dx = -dx
    return (origin[0] + dx, origin[1] + dy)


def _quad_endpoint(origin, a: float, m: float, u: float) -> tuple[float, float]:
    # Relative to the origin the curve is dy(u) = u*(a*u + m).
    return (origin[0] + u, origin[1] + u * (a * u + m))


def _bisect_branch(a: float, m: float, dist: float, sign: float) -> float | None:
    """Smallest-|u| solution of chord(u) = dist with sign(u) = sign.

    chord^2 is quartic in u, so the chord length along one branch is piecewise
    monotone with at most two interior turning points (closed-form roots of
    d(chord^2)/du / 2u = 2a^2 u^2 + 3am u + (1+m^2)).  Scanning the segments
    outward from the origin and bisecting inside the first one that brackets
    dist yields the first crossing, i.e. the point reached by walking away
    from the origin along the curve until the chord reaches dist.
    """

    def chord(u: float) -> float:
        dy = u * (a * u + m)
        return math.hypot(u, dy)

    turns: list[float] = []
    if a != 0.0:
        disc = m * m - 8.0
        if disc >= 0.0:
            r = math.sqrt(disc)
            turns = sorted(
                (u for u in ((-3 * m - r) / (4 * a), (-3 * m + r) / (4 * a)) if u * sign > 0),
                key=abs,
            )
    lo = 0.0
    # chord(0) = 0 < dist <= chord(sign*dist): the last segment always brackets.
    for hi in (*turns, sign * dist):
        if chord(hi) < dist:
            lo = hi
            continue
        for _ in range(BISECT_ITERS):
            mid = (lo + hi) / 2
            if chord(mid) < dist:
                lo = mid
            else:
                hi = mid
            if abs(chord((lo + hi) / 2) - dist) <= CHORD_TOL:
                return (lo + hi) / 2
        u = (lo + hi) / 2
        return u if abs(chord(u) - dist) <= CHORD_TOL else None
    return None


def solve_endpoint(
    origin: tuple[float, float],
    target: tuple[float, float] | None,
    dist: float,
    direction: DirectionParam | None,
    sinx: float | None,
    disp_hint: tuple[float, float],
) -> tuple[float, float]:
    """Swipe endpoint at chord length ``dist`` from origin along the fitted shape.

    Linear directions solve the circle/line intersection in closed form;
    quadratic ones rebuild the parabola through origin and target and bisect
    along the branch agreeing with ``disp_hint``.  Without a direction
    parameter the sinx fallback fixes the vertical component and takes the
    horizontal sign from the hint.
    """
    if dist <= 0:
        raise ValueError("dist must be positive")
    if direction is None:
        if sinx is None:
            raise ValueError("need a direction parameter or a sinx value")
        return _solve_sinx(origin, sinx, dist, disp_hint)
    if direction.kind is DirectionKind.LINEAR:
        return _solve_linear(origin, direction.value, dist, disp_hint)
    # Quadratic: y - y1 = a(x^2 - x1^2) + b(x - x1), constrained through target.
    if target is None:
        raise ValueError("quadratic direction requires a target")
    a = direction.value
    x1, y1 = origin
    x2, y2 = target
    if abs(x2 - x1) < 1e-9:
        if sinx is None:
            raise DegenerateTarget(f"target above origin (x={x1}): cannot fix b")
        log.debug("degenerate target x for quadratic; using sinx fallback")
        return _solve_sinx(origin, sinx, dist, disp_hint)
    b = ((y2 - y1) - a * (x2 * x2 - x1 * x1)) / (x2 - x1)
    m = 2 * a * x1 + b  # curve slope at the origin
    preferred = 1.0 if _dot((1.0, m), disp_hint) >= 0 else -1.0
    best: tuple[float, tuple[float, float]] | None = None
    for sign in (preferred, -preferred):
        u = _bisect_branch(a, m, dist, sign)
        if u is None:
            continue
        end = _quad_endpoint(origin, a, m, u)
        score = _dot((end[0] - x1, end[1] - y1), disp_hint)
        if best is None or score > best[0]:
            best = (score, end)
        if score >= 0 and sign == preferred:
            break  # preferred branch already agrees with the hint
    if best is None:
        raise NoConvergence(f"no branch reached chord {dist} within {CHORD_TOL}")
    if best[0] < 0:
        # The sampled chord overshoots the lobe the demo pulled along, so
        # every curve point at that distance heads against the demo
        # displacement.  Refuse and let the caller resample.
        raise NoConvergence(
            f"no curve point at chord {dist:.3f} agrees with the displacement hint"
        )
    return best[1]


def match_pattern(
    matrix: list[list[int]], pattern: SubmatrixPattern, rng: random.Random
) -> list[tuple[int, int]] | None:
    """Touched cells of one uniformly random placement where the pattern holds.

    A placement holds iff some icon index occupies every 1-cell, every 0-cell
    holds a different (non-empty) index, and -1 cells match anything.
    """
    n_rows, n_cols = len(matrix), len(matrix[0])
    if pattern.rows > n_rows or pattern.cols > n_cols:
        return None
    placements: list[tuple[int, int]] = []
    for r0 in range(n_rows - pattern.rows + 1):
        for c0 in range(n_cols - pattern.cols + 1):
            icon = None
            ok = True
            for rr in range(pattern.rows):
                for cc in range(pattern.cols):
                    if pattern.cell(rr, cc) == 1:
                        v = matrix[r0 + rr][c0 + cc]
                        if v < 0 or (icon is not None and v != icon):
                            ok = False
                            break
                        icon = v
                if not ok:
                    break
            if not ok or icon is None:
                continue
            for rr in range(pattern.rows):
                for cc in range(pattern.cols):
                    if pattern.cell(rr, cc) == 0:
                        v = matrix[r0 + rr][c0 + cc]
                        if v == -1 or v == icon:
                            ok = False
                            break
                if not ok:
                    break
            if ok:
                placements.append((r0, c0))
    if not placements:
        return None
    r0, c0 = placements[0] if len(placements) == 1 else rng.choice(placements)
    return [(r0 + dr, c0 + dc) for dr, dc in pattern.touched]


def _in_bounds(x: float, y: float, bounds: tuple[int, int]) -> bool:
    return 0 <= round(x) < bounds[0] and 0 <= round(y) < bounds[1]


def _clamp(x: float, y: float, bounds: tuple[int, int]) -> tuple[float, float]:
    return (min(max(x, 0.0), bounds[0] - 1), min(max(y, 0.0), bounds[1] - 1))


def _pool_swipe(
    tactic: Tactic,
    start_of,
    rng: random.Random,
    bounds: tuple[int, int],
) -> Gesture:
    """Sample (start, dist, dur, sinx) until the endpoint lands on screen.

    ``start_of`` draws a start point per attempt; the horizontal sign is free
    (the demos constrain only the vertical component) and is sampled.
    """
    pools = tactic.pools
    for attempt in range(RESAMPLE_TRIES):
        x0, y0 = start_of()
        dist = rng.choice(pools.dist)
        dur = rng.choice(pools.dur)
        sinx = rng.choice(pools.sinx)
        sign = rng.choice((-1.0, 1.0))
        dx = sign * dist * math.sqrt(max(0.0, 1.0 - sinx * sinx))
        x1, y1 = x0 + dx, y0 + dist * sinx
        if _in_bounds(x0, y0, bounds) and _in_bounds(x1, y1, bounds):
            return Gesture.swipe(x0, y0, x1, y1, dur)
    log.debug("swipe endpoint clamped to screen after %d tries", RESAMPLE_TRIES)
    x0, y0 = _clamp(x0, y0, bounds)
    x1, y1 = _clamp(x1, y1, bounds)
    return Gesture.swipe(x0, y0, x1, y1, dur)


def _tap_dur(tactic: Tactic, rng: random.Random) -> float:
    return rng.choice(tactic.pools.taps)[2]


def synthesize_action(
    tactic: Tactic,
    context: Context,
    rng: random.Random,
    bounds: tuple[int, int] = (480, 800),
    tactic_id: str = "",
) -> PlannedAction:
    """Concretize one action of the tactic's type against the live context."""
    if tactic.rule is Rule.R4:
        return _synthesize_pattern(tactic, context, rng, tactic_id)
    gestures: list[Gesture] = []
    for kind in tactic.action_type.kinds:
        if tactic.rule is Rule.R1:
            gestures.append(_gesture_r1(tactic, kind, rng, bounds))
        elif tactic.rule is Rule.R3 and kind is GestureKind.SWIPE:
            gestures.append(_gesture_r3(tactic, context, rng, bounds))
        else:  # R2/R5 and any anchored taps
            gestures.append(_gesture_anchored(tactic, context, kind, rng, bounds))
    return PlannedAction(gestures, tactic_id, tactic.rule)


def _gesture_r1(tactic, kind, rng, bounds) -> Gesture:
    if kind is GestureKind.TAP:
        x, y, dur = rng.choice(tactic.pools.taps)
        return Gesture.tap(x, y, dur)
    return _pool_swipe(tactic, lambda: rng.choice(tactic.pools.swipe_starts), rng, bounds)


def _gesture_anchored(tactic, context, kind, rng, bounds) -> Gesture:
    anchor = tactic.action_type.anchor or IconCategory.ACTIONABLE
    instances = context.by_category(anchor)
    if not instances:
        raise MissingInstance(f"context lacks {anchor.value} instances")
    if kind is GestureKind.TAP:
        inst = rng.choice(instances)
        return Gesture.tap(*inst.centroid, _tap_dur(tactic, rng))
    return _pool_swipe(tactic, lambda: rng.choice(instances).centroid, rng, bounds)


def _gesture_r3(tactic, context, rng, bounds) -> Gesture:
    origins = context.by_category(IconCategory.ACTIONABLE)
    targets = context.by_category(IconCategory.TARGET)
    if not origins or not targets:
        raise MissingInstance("R3 needs an actionable origin and a target")
    pools = tactic.pools
    end = None
    for attempt in range(RESAMPLE_TRIES):
        origin = rng.choice(origins).centroid
        target = rng.choice(targets).centroid
        dist = rng.choice(pools.dist)
        dur = rng.choice(pools.dur)
        direction = rng.choice(pools.direction) if pools.direction else None
        sinx = rng.choice(pools.sinx) if pools.sinx else None
        try:
            end = solve_endpoint(origin, target, dist, direction, sinx, pools.mean_disp)
        except (NoConvergence, DegenerateTarget):
            continue
        if _in_bounds(*origin, bounds) and _in_bounds(*end, bounds):
            return Gesture.swipe(*origin, *end, dur)
    if end is None:
        raise NoConvergence("no endpoint solution across resampling attempts")
    log.debug("R3 endpoint clamped to screen after %d tries", RESAMPLE_TRIES)
    x0, y0 = _clamp(*origin, bounds)
    x1, y1 = _clamp(*end, bounds)
    return Gesture.swipe(x0, y0, x1, y1, dur)


def _synthesize_pattern(tactic, context, rng, tactic_id) -> PlannedAction:
    if context.grid is None:
        raise MissingInstance("R4 tactic requires a grid context")
    order = list(tactic.patterns)
    rng.shuffle(order)
    for pattern in order:
        cells = match_pattern(context.grid.matrix, pattern, rng)
        if cells is None:
            continue
        gestures = []
        for cell in cells:
            inst = context.grid.cells.get(cell)
            if inst is None:
                break  # matrix/cell map disagree; try the next pattern
            gestures.append(Gesture.tap(*inst.centroid, _tap_dur(tactic, rng)))
        else:
            return PlannedAction(gestures, tactic_id, Rule.R4)
    raise NoApplicablePattern(f"none of {len(tactic.patterns)} patterns fit the grid")


def action_to_events(
    planned: PlannedAction, bounds: tuple[int, int] = (480, 800), base_ts: float = 0.0
) -> str:
    return emit_trace(Action(planned.gestures), base_ts, bounds)
