"""Slingshot: pull back on the projectile, fly straight, hit the board.

A volley gives 10 shots per level; the outcome is judged when the volley
completes (3+ hits advance, fewer retry the level). The flight is the straight
ray opposite the pull vector with range dist*dur scaled, so a pull's worth is
decided by its direction while speed/range stay consequential.
"""

from __future__ import annotations

import math

import numpy as np

from ..trace import Gesture, GestureKind
from . import draw
from .base import NEXT, RETRY, Game
from .icons import template

LAUNCH = (120.0, 640.0)
PROJECTILE_BOX = (100, 620, 40, 40)
RANGE_PER_DIST_DUR = 30.0
SHOTS_PER_VOLLEY = 10
HITS_TO_ADVANCE = 3
HIT_SCORE = 100


def _segment_hits_box(p: tuple[float, float], d: tuple[float, float], length: float, box) -> bool:
    """Slab test: does p + t*d for t in [0, length] cross the bbox?"""
    bx, by, bw, bh = box
    t0, t1 = 0.0, length
    for o, dd, lo, hi in ((p[0], d[0], bx, bx + bw), (p[1], d[1], by, by + bh)):
        if abs(dd) < 1e-12:
            if not lo <= o <= hi:
                return False
            continue
        ta, tb = (lo - o) / dd, (hi - o) / dd
        if ta > tb:
            ta, tb = tb, ta
        t0, t1 = max(t0, ta), min(t1, tb)
        if t0 > t1:
            return False
    return True


class Slingshot(Game):
    game_id = "slingshot"

    def __init__(self, seed: int):
        self.shots_left = 0
        self.hits = 0
        self.board_xy = (0, 0)
        super().__init__(seed)

    def _enter_play(self) -> None:
        self.shots_left = SHOTS_PER_VOLLEY
        self.hits = 0
        self._new_board()

    def _new_board(self) -> None:
        self.board_xy = (self.rng.randrange(80, 360), self.rng.randrange(140, 340))

    def _play_gesture(self, g: Gesture) -> bool:
        if g.kind is not GestureKind.SWIPE:
            return False
        px, py, pw, ph = PROJECTILE_BOX
        if not (px <= g.x_f < px + pw and py <= g.y_f < py + ph):
            return False
        pull = (g.x_l - g.x_f, g.y_l - g.y_f)
        norm = math.hypot(*pull)
        if norm < 1e-9:
            return False
        flight = (-pull[0] / norm, -pull[1] / norm)
        reach = RANGE_PER_DIST_DUR * g.dist * g.dur
        bx, by = self.board_xy
        if _segment_hits_box(LAUNCH, flight, reach, (bx, by, 48, 48)):
            self.score += HIT_SCORE * self.level
            self.hits += 1
        self.shots_left -= 1
        if self.shots_left == 0:
            self.scene = NEXT if self.hits >= HITS_TO_ADVANCE else RETRY
        else:
            self._new_board()
        return True

    def _render_play(self, frame: np.ndarray) -> None:
        draw.blit(frame, template("slingshot", "board"), *self.board_xy, self.gain)
        draw.blit(frame, template("slingshot", "projectile"), PROJECTILE_BOX[0], PROJECTILE_BOX[1], self.gain)
