"""Tactic inference: generalize recorded (context, action) pairs into tactics.

Pipeline: pair frames with classified actions, cluster pairs by abstract
context signature, find each cluster's modal gesture sequence and anchor
category, dispatch one of five parameterization rules, and collect the
parameter pools the application phase will sample from.
"""

from __future__ import annotations

import json
import logging
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .scene import (
    AbstractContext,
    Context,
    Frame,
    IconCategory,
    IconSpec,
    build_context,
    read_ppm,
)
from .trace import Action, GestureKind, parse_gestures

log = logging.getLogger(__name__)

TACTIC_FILE_VERSION = 1

COLLINEAR_AREA_EPS = 1e-6
VERTICAL_EPS = 1e-9
FIT_RESIDUAL_EPS = 1e-6


class InferError(Exception):
    pass


class OrphanFile(InferError):
    def __init__(self, t: int, missing: str):
        self.t = t
        super().__init__(f"demo timestamp {t} lacks its {missing} counterpart")


class NoMajority(InferError):
    pass


class VerticalDegenerate(InferError):
    pass


class HeterogeneousTouch(InferError):
    pass


class EmptyDemo(InferError):
    pass


class Rule(Enum):
    R1 = "R1"  # no anchor: replay raw gesture properties
    R2 = "R2"  # function anchor: act on a function icon
    R3 = "R3"  # actionable anchor with targets: solve swipe endpoints
    R4 = "R4"  # actionable anchor on a grid: replay submatrix patterns
    R5 = "R5"  # actionable anchor, no target, no grid


class DirectionKind(Enum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"


@dataclass(frozen=True)
class DirectionParam:
    kind: DirectionKind
    value: float


@dataclass(frozen=True)
class ActionType:
    kinds: tuple[GestureKind, ...]
    anchor: IconCategory | None


@dataclass(frozen=True)
class SubmatrixPattern:
    rows: int
    cols: int
    cells: tuple[int, ...]  # row-major over {1, 0, -1}
    touched: tuple[tuple[int, int], ...]

    def cell(self, r: int, c: int) -> int:
        return self.cells[r * self.cols + c]


@dataclass
class ContextActionPair:
    context: Context
    action: Action
    t: int


@dataclass
class Pools:
    dist: list[float] = field(default_factory=list)
    dur: list[float] = field(default_factory=list)
    sinx: list[float] = field(default_factory=list)
    direction: list[DirectionParam] = field(default_factory=list)
    taps: list[tuple[float, float, float]] = field(default_factory=list)
    swipe_starts: list[tuple[float, float]] = field(default_factory=list)
    mean_disp: tuple[float, float] = (0.0, 0.0)


@dataclass
class Tactic:
    signature: AbstractContext
    action_type: ActionType
    rule: Rule
    pools: Pools
    patterns: list[SubmatrixPattern] = field(default_factory=list)


@dataclass
class TacticSet:
    tactics: list[Tactic]
    provenance: dict = field(default_factory=dict)
    version: int = TACTIC_FILE_VERSION


def pair_demo(
    session: str | Path, specs: list[IconSpec], theta: float = 0.90
) -> list[ContextActionPair]:
    """Pair each ``<t>.ppm`` frame with its classified ``<t>.txt`` action.

    Timestamps without both files raise OrphanFile; traces with no
    recognizable gestures are dropped (and counted in a log line).
    """
    session = Path(session)
    frames = {int(p.stem): p for p in session.glob("*.ppm") if p.stem.isdigit()}
    traces = {int(p.stem): p for p in session.glob("*.txt") if p.stem.isdigit()}
    for t in sorted(frames.keys() ^ traces.keys()):
        raise OrphanFile(t, "trace" if t in frames else "frame")
    pairs: list[ContextActionPair] = []
    dropped = 0
    for t in sorted(frames):
        gestures = parse_gestures(traces[t].read_text())
        if not gestures:
            dropped += 1
            continue
        frame = Frame(read_ppm(frames[t]), t)
        pairs.append(ContextActionPair(build_context(frame, specs, theta), Action(gestures, t), t))
    if dropped:
        log.info("dropped %d gesture-less demo pairs out of %d", dropped, len(frames))
    return pairs


def cluster_contexts(
    pairs: list[ContextActionPair],
) -> dict[AbstractContext, list[ContextActionPair]]:
    clusters: dict[AbstractContext, list[ContextActionPair]] = {}
    for p in pairs:
        clusters.setdefault(p.context.signature, []).append(p)
    return clusters


def _kinds(pair: ContextActionPair) -> tuple[GestureKind, ...]:
    return tuple(g.kind for g in pair.action.gestures)


def identify_action_type(cluster: list[ContextActionPair]) -> ActionType:
    """The strict-majority gesture sequence, refined with its anchor category.

    The anchor is the first category (actionable, function, target) such that
    every gesture of every modal action starts inside one of that category's
    instances in its own context.
    """
    counts = Counter(_kinds(p) for p in cluster)
    kinds, n = counts.most_common(1)[0]
    if n * 2 <= len(cluster):
        raise NoMajority(f"no gesture sequence exceeds 50% of {len(cluster)} actions")
    modal = [p for p in cluster if _kinds(p) == kinds]
    anchor = None
    for cat in (IconCategory.ACTIONABLE, IconCategory.FUNCTION, IconCategory.TARGET):
        if all(
            any(inst.contains(*g.start) for inst in p.context.by_category(cat))
            for p in modal
            for g in p.action.gestures
        ):
            anchor = cat
            break
    return ActionType(kinds, anchor)


def select_rule(signature: AbstractContext, action_type: ActionType) -> Rule:
    if action_type.anchor is None:
        return Rule.R1
    if action_type.anchor is IconCategory.FUNCTION:
        return Rule.R2
    if action_type.anchor is IconCategory.ACTIONABLE:
        if IconCategory.TARGET in signature.categories:
            return Rule.R3
        if signature.grid_present:
            return Rule.R4
    return Rule.R5


def fit_direction(
    p0: tuple[float, float], p1: tuple[float, float], p2: tuple[float, float]
) -> DirectionParam:
    """Fit the swipe trajectory through origin, swipe end and target.

    Pairwise-distinct x values and a non-collinear triple give the quadratic
    y = ax^2 + bx + c (only ``a`` is retained); collinear or ill-conditioned
    triples fall back to the line through p0 and p1.
    """
    (x0, y0), (x1, y1), (x2, y2) = p0, p1, p2
    if abs(x1 - x0) < VERTICAL_EPS:
        raise VerticalDegenerate(f"swipe from x={x0} to x={x1} has no finite slope")
    area = abs((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)) / 2
    xs_distinct = abs(x2 - x0) >= VERTICAL_EPS and abs(x2 - x1) >= VERTICAL_EPS
    if xs_distinct and area >= COLLINEAR_AREA_EPS:
        a_mat = np.array([[x0 * x0, x0, 1.0], [x1 * x1, x1, 1.0], [x2 * x2, x2, 1.0]])
        y_vec = np.array([y0, y1, y2])
        abc = np.linalg.solve(a_mat, y_vec)
        if np.max(np.abs(a_mat @ abc - y_vec)) <= FIT_RESIDUAL_EPS:
            return DirectionParam(DirectionKind.QUADRATIC, float(abc[0]))
        log.warning("ill-conditioned quadratic fit, falling back to linear")
    return DirectionParam(DirectionKind.LINEAR, (y1 - y0) / (x1 - x0))


def extract_submatrix(
    matrix: list[list[int]], touched: list[tuple[int, int]]
) -> SubmatrixPattern:
    """Normalize a grid matrix around the touched cells and crop the pattern.

    Cells become 1 (same icon as touched), 0 (different icon) or -1 (empty);
    the crop is the bounding box of the 8-connected 1-regions reachable from
    the touched cells.
    """
    if not touched:
        raise ValueError("touched cell list is empty")
    values = {matrix[r][c] for r, c in touched}
    if len(values) != 1:
        raise HeterogeneousTouch(f"touched cells span icon indexes {sorted(values)}")
    e = values.pop()
    if e < 0:
        raise ValueError("touched cell is empty")
    n_rows, n_cols = len(matrix), len(matrix[0])
    norm = [
        [1 if v == e else (-1 if v == -1 else 0) for v in row]
        for row in matrix
    ]
    visited: set[tuple[int, int]] = set()
    queue = list(dict.fromkeys(touched))
    visited.update(queue)
    while queue:
        r, c = queue.pop()
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                nr, nc = r + dr, c + dc
                if (
                    0 <= nr < n_rows
                    and 0 <= nc < n_cols
                    and (nr, nc) not in visited
                    and norm[nr][nc] == 1
                ):
                    visited.add((nr, nc))
                    queue.append((nr, nc))
    r0 = min(r for r, _ in visited)
    r1 = max(r for r, _ in visited)
    c0 = min(c for _, c in visited)
    c1 = max(c for _, c in visited)
    cells = tuple(norm[r][c] for r in range(r0, r1 + 1) for c in range(c0, c1 + 1))
    offsets = tuple(dict.fromkeys((r - r0, c - c0) for r, c in touched))
    return SubmatrixPattern(r1 - r0 + 1, c1 - c0 + 1, cells, offsets)


def _containing_instance(pair: ContextActionPair, category: IconCategory, point):
    for inst in pair.context.by_category(category):
        if inst.contains(*point):
            return inst
    return None


def _pools_from_modal(modal: list[ContextActionPair]) -> Pools:
    pools = Pools()
    disps: list[tuple[float, float]] = []
    for p in modal:
        for g in p.action.gestures:
            if g.kind is GestureKind.TAP:
                pools.taps.append((g.x_f, g.y_f, g.dur))
            else:
                pools.dist.append(g.dist)
                pools.dur.append(g.dur)
                pools.sinx.append(g.sinx if g.sinx is not None else 0.0)
                pools.swipe_starts.append(g.start)
                if g.dist > 0:
                    disps.append(((g.x_l - g.x_f) / g.dist, (g.y_l - g.y_f) / g.dist))
    if disps:
        ux = sum(d[0] for d in disps) / len(disps)
        uy = sum(d[1] for d in disps) / len(disps)
        norm = math.hypot(ux, uy)
        if norm > 1e-12:
            pools.mean_disp = (ux / norm, uy / norm)
    return pools


def _rule_pools_complete(rule: Rule, at: ActionType, pools: Pools, patterns) -> bool:
    has_tap = GestureKind.TAP in at.kinds
    has_swipe = GestureKind.SWIPE in at.kinds
    if has_tap and not pools.taps:
        return False
    if has_swipe and not (pools.dist and pools.dur and pools.sinx):
        return False
    if rule is Rule.R3 and not (pools.direction or pools.sinx):
        return False
    if rule is Rule.R4 and not patterns:
        return False
    return True


def infer_tactics(
    pairs: list[ContextActionPair],
    rng: random.Random | None = None,
    provenance: dict | None = None,
) -> TacticSet:
    """Build one tactic per context cluster; see the rule glossary in Rule.

    Target choice for curve fitting is the only randomized step, so a fixed
    rng makes the result deterministic.
    """
    rng = rng if rng is not None else random.Random(0)
    tactics: list[Tactic] = []
    for signature, cluster in cluster_contexts(pairs).items():
        try:
            at = identify_action_type(cluster)
        except NoMajority as exc:
            log.warning("discarding cluster %s: %s", signature.describe(), exc)
            continue
        rule = select_rule(signature, at)
        modal = [p for p in cluster if _kinds(p) == at.kinds]
        pools = _pools_from_modal(modal)
        patterns: list[SubmatrixPattern] = []
        if rule is Rule.R3:
            for p in modal:
                targets = p.context.by_category(IconCategory.TARGET)
                for g in p.action.gestures:
                    if g.kind is not GestureKind.SWIPE or not targets:
                        continue
                    origin = _containing_instance(p, IconCategory.ACTIONABLE, g.start)
                    if origin is None:
                        continue
                    target = rng.choice(targets)
                    try:
                        pools.direction.append(
                            fit_direction(origin.centroid, g.end, target.centroid)
                        )
                    except VerticalDegenerate:
                        log.info("vertical demo swipe at t=%d: no direction param", p.t)
        elif rule is Rule.R4:
            for p in modal:
                if p.context.grid is None:
                    continue
                cells = []
                for g in p.action.gestures:
                    inst = _containing_instance(p, IconCategory.ACTIONABLE, g.start)
                    if inst is not None:
                        cells.append(p.context.grid.cell_of(inst))
                if len(cells) != len(p.action.gestures):
                    continue
                try:
                    pattern = extract_submatrix(p.context.grid.matrix, cells)
                except (HeterogeneousTouch, ValueError) as exc:
                    log.info("skipping R4 pair at t=%d: %s", p.t, exc)
                    continue
                if pattern not in patterns:
                    patterns.append(pattern)
        if not _rule_pools_complete(rule, at, pools, patterns):
            log.warning(
                "discarding cluster %s (%s): required pools empty", signature.describe(), rule.value
            )
            continue
        tactics.append(Tactic(signature, at, rule, pools, patterns))
    if not tactics:
        raise EmptyDemo("no cluster produced a usable tactic")
    return TacticSet(tactics, provenance or {})


def _tactic_to_dict(t: Tactic) -> dict:
    return {
        "signature": {
            "categories": sorted(c.value for c in t.signature.categories),
            "grid": t.signature.grid_present,
        },
        "action_type": {
            "gestures": [k.value for k in t.action_type.kinds],
            "anchor": t.action_type.anchor.value if t.action_type.anchor else None,
        },
        "rule": t.rule.value,
        "pools": {
            "dist": t.pools.dist,
            "dur": t.pools.dur,
            "sinx": t.pools.sinx,
            "direction": [{"kind": d.kind.value, "value": d.value} for d in t.pools.direction],
            "taps": [{"x": x, "y": y, "dur": d} for x, y, d in t.pools.taps],
            "swipe_starts": [[x, y] for x, y in t.pools.swipe_starts],
            "mean_disp": list(t.pools.mean_disp),
        },
        "patterns": [
            {
                "rows": p.rows,
                "cols": p.cols,
                "cells": list(p.cells),
                "touched": [[r, c] for r, c in p.touched],
            }
            for p in t.patterns
        ],
    }


def _tactic_from_dict(d: dict) -> Tactic:
    signature = AbstractContext(
        frozenset(IconCategory(c) for c in d["signature"]["categories"]),
        d["signature"]["grid"],
    )
    at = ActionType(
        tuple(GestureKind(g) for g in d["action_type"]["gestures"]),
        IconCategory(d["action_type"]["anchor"]) if d["action_type"]["anchor"] else None,
    )
    p = d["pools"]
    pools = Pools(
        dist=list(p["dist"]),
        dur=list(p["dur"]),
        sinx=list(p["sinx"]),
        direction=[DirectionParam(DirectionKind(e["kind"]), e["value"]) for e in p["direction"]],
        taps=[(e["x"], e["y"], e["dur"]) for e in p["taps"]],
        swipe_starts=[(x, y) for x, y in p["swipe_starts"]],
        mean_disp=(p["mean_disp"][0], p["mean_disp"][1]),
    )
    patterns = [
        SubmatrixPattern(
            e["rows"], e["cols"], tuple(e["cells"]), tuple((r, c) for r, c in e["touched"])
        )
        for e in d["patterns"]
    ]
    return Tactic(signature, at, Rule(d["rule"]), pools, patterns)


def tactics_to_dict(ts: TacticSet) -> dict:
    return {
        "version": ts.version,
        "provenance": ts.provenance,
        "tactics": [_tactic_to_dict(t) for t in ts.tactics],
    }


def tactics_from_dict(doc: dict) -> TacticSet:
    if doc.get("version") != TACTIC_FILE_VERSION:
        raise ValueError(f"unsupported tactic file version {doc.get('version')!r}")
    return TacticSet([_tactic_from_dict(d) for d in doc["tactics"]], doc["provenance"])


def save_tactics(ts: TacticSet, path: str | Path) -> None:
    Path(path).write_text(json.dumps(tactics_to_dict(ts), indent=2) + "\n")


def load_tactics(path: str | Path) -> TacticSet:
    return tactics_from_dict(json.loads(Path(path).read_text()))
