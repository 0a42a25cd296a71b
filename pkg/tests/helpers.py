"""Shared generators and independent oracles used across test modules."""

from __future__ import annotations

import math
import random

import numpy as np
from scipy import ndimage

from playtest.infer import DirectionParam, SubmatrixPattern, fit_direction
from playtest.scene import Context, Frame, GridLayout, IconCategory, IconInstance, IconSpec, context_signature
from playtest.trace import GestureKind


def brute_classify(x0: int, y0: int, x1: int, y1: int, dur: float) -> GestureKind:
    # Independent oracle: swipe iff euclidean displacement >= 20 px.
    if ((x1 - x0) ** 2 + (y1 - y0) ** 2) ** 0.5 >= 20.0:
        return GestureKind.SWIPE
    return GestureKind.TAP


def brute_reachable_bbox(matrix: list[list[int]], touched: list[tuple[int, int]], e: int):
    # Flood-fill oracle: bbox over the 8-connected same-index components
    # containing the touched cells.
    arr = np.array(matrix)
    labels, _ = ndimage.label(arr == e, structure=np.ones((3, 3), int))
    wanted = {labels[r, c] for r, c in touched}
    mask = np.isin(labels, sorted(wanted))
    rs, cs = np.nonzero(mask)
    return rs.min(), rs.max(), cs.min(), cs.max()


def make_instance(cat: IconCategory, cx: float, cy: float, side: int = 40, name: str | None = None):
    spec = IconSpec(name or f"{cat.value}-icon", cat, np.zeros((side, side, 3), np.uint8))
    return IconInstance(spec, (int(cx - side / 2), int(cy - side / 2), side, side), 1.0)


def make_context(instances, grid: GridLayout | None = None) -> Context:
    return Context(
        Frame(np.zeros((1, 1, 3), np.uint8)),
        instances,
        grid,
        context_signature(instances, grid),
    )


def solver_case(rng: random.Random) -> dict:
    """One demo-like endpoint-solver case.

    Mirrors how cases arise in play: the demo pulled roughly opposite the
    target, the direction parameter was fitted from that pull, and the hint
    is the demo's mean pull direction.  The solved endpoint must then satisfy
    the chord constraint and agree with the hint.
    """
    origin = (rng.uniform(120, 360), rng.uniform(300, 700))
    theta = rng.uniform(0, 2 * math.pi)
    target_d = rng.uniform(180, 420)
    target = (
        origin[0] + target_d * math.cos(theta),
        origin[1] + target_d * math.sin(theta),
    )
    pull = rng.uniform(60, 150)
    jitter = rng.uniform(-0.25, 0.25)
    phi = theta + math.pi + jitter
    end = (origin[0] + pull * math.cos(phi), origin[1] + pull * math.sin(phi))
    try:
        direction = fit_direction(origin, end, target)
    except Exception:
        direction = None
    sinx = (end[1] - origin[1]) / pull
    hint_phi = phi + rng.uniform(-0.3, 0.3)
    hint = (math.cos(hint_phi), math.sin(hint_phi))
    dist = pull * rng.uniform(0.8, 1.2)
    return {
        "origin": origin,
        "target": target,
        "dist": dist,
        "direction": direction,
        "sinx": sinx,
        "hint": hint,
    }


def curve_residual(origin, target, direction: DirectionParam, point) -> float:
    """Distance (in y) of a point from the curve solve_endpoint constructed."""
    from playtest.infer import DirectionKind

    x1, y1 = origin
    x, y = point
    if direction.kind is DirectionKind.LINEAR:
        return abs((y - y1) - direction.value * (x - x1))
    a = direction.value
    x2, y2 = target
    b = ((y2 - y1) - a * (x2 * x2 - x1 * x1)) / (x2 - x1)
    return abs((y - y1) - (a * (x * x - x1 * x1) + b * (x - x1)))


def brute_pattern_placements(matrix: list[list[int]], pattern: SubmatrixPattern) -> set[tuple[int, int]]:
    """Independent exhaustive enumerator of valid pattern placements."""
    n_rows, n_cols = len(matrix), len(matrix[0])
    out: set[tuple[int, int]] = set()
    if pattern.rows > n_rows or pattern.cols > n_cols:
        return out
    indexes = {v for row in matrix for v in row if v >= 0}
    for r0 in range(n_rows - pattern.rows + 1):
        for c0 in range(n_cols - pattern.cols + 1):
            for i in indexes:
                good = True
                for rr in range(pattern.rows):
                    for cc in range(pattern.cols):
                        p = pattern.cell(rr, cc)
                        v = matrix[r0 + rr][c0 + cc]
                        if p == 1 and v != i:
                            good = False
                        elif p == 0 and (v == i or v == -1):
                            good = False
                    if not good:
                        break
                if good:
                    out.add((r0, c0))
                    break
    return out


def random_pattern(rng: random.Random, max_side: int = 4) -> SubmatrixPattern:
    rows = rng.randint(1, max_side)
    cols = rng.randint(1, max_side)
    cells = [rng.choice([1, 0, 0, -1]) for _ in range(rows * cols)]
    if 1 not in cells:
        cells[rng.randrange(len(cells))] = 1
    ones = [(k // cols, k % cols) for k, v in enumerate(cells) if v == 1]
    touched = tuple(rng.sample(ones, k=min(len(ones), rng.randint(1, 2))))
    return SubmatrixPattern(rows, cols, tuple(cells), touched)


def random_matrix(rng: random.Random, max_side: int = 8, n_icons: int = 5) -> list[list[int]]:
    rows = rng.randint(1, max_side)
    cols = rng.randint(1, max_side)
    return [
        [rng.choice([-1] + list(range(n_icons))) for _ in range(cols)]
        for _ in range(rows)
    ]
