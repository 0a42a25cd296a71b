"""Buttonrow: flood-fill the color field from the top-left corner.

A 10x10 field of five colors is captured by recoloring the region connected
to the origin; the five color buttons sit in a single bottom row (one row on
purpose, so no grid is detectable and play anchors on individual buttons).
Each newly captured cell scores one point; full capture advances the level.
"""

from __future__ import annotations

import numpy as np

from ..trace import Gesture, GestureKind
from . import draw
from .base import NEXT, Game
from .icons import BUTTON_NAMES, template

FIELD_SIDE = 10
CELL_PX = 36
FIELD_X, FIELD_Y = 60, 150
BUTTON_Y = 700
BUTTON_X0, BUTTON_PITCH, BUTTON_SIDE = 60, 80, 40

_CELL_TINTS = [
    (226, 178, 46),  # amber
    (150, 160, 44),  # olive
    (218, 62, 62),  # ruby
    (46, 188, 188),  # teal
    (152, 84, 218),  # violet
]


class Buttonrow(Game):
    game_id = "buttonrow"

    def __init__(self, seed: int):
        self.field: list[list[int]] = [[0] * FIELD_SIDE for _ in range(FIELD_SIDE)]
        super().__init__(seed)

    def _enter_play(self) -> None:
        self.field = [
            [self.rng.randrange(len(BUTTON_NAMES)) for _ in range(FIELD_SIDE)]
            for _ in range(FIELD_SIDE)
        ]

    def region(self) -> set[tuple[int, int]]:
        """Cells connected to the origin sharing its color (4-neighborhood)."""
        color = self.field[0][0]
        seen = {(0, 0)}
        stack = [(0, 0)]
        while stack:
            r, c = stack.pop()
            for rr, cc in ((r + 1, c), (r - 1, c), (r, c + 1), (r, c - 1)):
                if (
                    0 <= rr < FIELD_SIDE
                    and 0 <= cc < FIELD_SIDE
                    and (rr, cc) not in seen
                    and self.field[rr][cc] == color
                ):
                    seen.add((rr, cc))
                    stack.append((rr, cc))
        return seen

    def _button_at(self, x: float, y: float) -> int | None:
        if not BUTTON_Y <= y < BUTTON_Y + BUTTON_SIDE:
            return None
        for k in range(len(BUTTON_NAMES)):
            bx = BUTTON_X0 + k * BUTTON_PITCH
            if bx <= x < bx + BUTTON_SIDE:
                return k
        return None

    def _play_gesture(self, g: Gesture) -> bool:
        if g.kind is not GestureKind.TAP:
            return False
        k = self._button_at(g.x_f, g.y_f)
        if k is None or k == self.field[0][0]:
            return False
        before = self.region()
        for r, c in before:
            self.field[r][c] = k
        after = self.region()
        self.score += len(after) - len(before)
        if len(after) == FIELD_SIDE * FIELD_SIDE:
            self.scene = NEXT
        return True

    def _render_play(self, frame: np.ndarray) -> None:
        for r in range(FIELD_SIDE):
            for c in range(FIELD_SIDE):
                draw.fill_rect(
                    frame,
                    FIELD_X + c * CELL_PX,
                    FIELD_Y + r * CELL_PX,
                    CELL_PX - 2,
                    CELL_PX - 2,
                    _CELL_TINTS[self.field[r][c]],
                )
        for k, name in enumerate(BUTTON_NAMES):
            draw.blit(
                frame,
                template("buttonrow", name),
                BUTTON_X0 + k * BUTTON_PITCH,
                BUTTON_Y,
                self.gain,
            )
