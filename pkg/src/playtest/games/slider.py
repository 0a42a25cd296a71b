"""Slider: 4x4 doubling-tile board driven by compass swipes.

No icon templates exist for this game, so analysis sees a bare screen; the
swipe direction is the axis nearest the swipe vector, and a tap slides
toward whichever side of the board center it lands on (tap zones). Dead
boards drop to a retry scene rather than ending the run, and score persists
across retries.
"""

from __future__ import annotations

import numpy as np

from ..trace import Gesture, GestureKind
from . import draw
from .base import RETRY, Game

SIDE = 4
SPAWN_FOUR_P = 0.1
# board pixel geometry
BOARD_X, BOARD_Y = 50, 210
TILE_PITCH, TILE_SIDE = 95, 86

_TILE_TINTS = [
    (92, 84, 72),
    (128, 112, 88),
    (164, 132, 92),
    (196, 148, 84),
    (212, 136, 68),
    (220, 116, 56),
    (224, 96, 48),
    (208, 180, 84),
    (212, 188, 68),
    (216, 196, 52),
    (220, 204, 40),
]


class Slider(Game):
    game_id = "slider"

    def __init__(self, seed: int):
        self.board: list[list[int]] = [[0] * SIDE for _ in range(SIDE)]
        super().__init__(seed)

    def _enter_play(self) -> None:
        self.board = [[0] * SIDE for _ in range(SIDE)]
        self._spawn()
        self._spawn()

    def _spawn(self) -> None:
        empties = [(r, c) for r in range(SIDE) for c in range(SIDE) if self.board[r][c] == 0]
        r, c = self.rng.choice(empties)
        self.board[r][c] = 4 if self.rng.random() < SPAWN_FOUR_P else 2

    def _lines(self, direction: str) -> list[list[tuple[int, int]]]:
        """Cell coordinates of each line, ordered from the wall swiped toward."""
        rows, cols = range(SIDE), range(SIDE)
        match direction:
            case "left":
                return [[(r, c) for c in cols] for r in rows]
            case "right":
                return [[(r, c) for c in reversed(cols)] for r in rows]
            case "up":
                return [[(r, c) for r in rows] for c in cols]
            case _:
                return [[(r, c) for r in reversed(rows)] for c in cols]

    def _slide(self, direction: str) -> bool:
        changed = False
        gained = 0
        for line in self._lines(direction):
            vals = [self.board[r][c] for r, c in line]
            packed = [v for v in vals if v]
            merged: list[int] = []
            i = 0
            while i < len(packed):
                if i + 1 < len(packed) and packed[i] == packed[i + 1]:
                    merged.append(packed[i] * 2)
                    gained += packed[i] * 2
                    i += 2
                else:
                    merged.append(packed[i])
                    i += 1
            merged += [0] * (SIDE - len(merged))
            if merged != vals:
                changed = True
                for (r, c), v in zip(line, merged):
                    self.board[r][c] = v
        if changed:
            self.score += gained
            self._spawn()
            if not self._any_move():
                self.scene = RETRY
        return changed

    def _any_move(self) -> bool:
        for r in range(SIDE):
            for c in range(SIDE):
                v = self.board[r][c]
                if v == 0:
                    return True
                if r + 1 < SIDE and self.board[r + 1][c] == v:
                    return True
                if c + 1 < SIDE and self.board[r][c + 1] == v:
                    return True
        return False

    def _play_gesture(self, g: Gesture) -> bool:
        if g.kind is GestureKind.SWIPE:
            dx, dy = g.x_l - g.x_f, g.y_l - g.y_f
        else:
            # Tap zones: a tap slides toward its side of the board center.
            dx = g.x_f - (BOARD_X + SIDE * TILE_PITCH / 2)
            dy = g.y_f - (BOARD_Y + SIDE * TILE_PITCH / 2)
        if abs(dx) >= abs(dy):
            direction = "left" if dx < 0 else "right"
        else:
            direction = "up" if dy < 0 else "down"
        return self._slide(direction)

    def _render_play(self, frame: np.ndarray) -> None:
        for r in range(SIDE):
            for c in range(SIDE):
                x = BOARD_X + c * TILE_PITCH
                y = BOARD_Y + r * TILE_PITCH
                v = self.board[r][c]
                if v == 0:
                    draw.fill_rect(frame, x, y, TILE_SIDE, TILE_SIDE, (44, 48, 54))
                    continue
                tint = _TILE_TINTS[min(v.bit_length() - 2, len(_TILE_TINTS) - 1)]
                draw.fill_rect(frame, x, y, TILE_SIDE, TILE_SIDE, tint)
                draw.fill_rect(frame, x + 30, y + 30, 26, 26, (30, 32, 36))
