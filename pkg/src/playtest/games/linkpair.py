"""Linkpair: clear pairs of identical fruits joined by at most three segments.

The board is a 6x8 lattice of five fruit kinds. Tapping a fruit selects it;
tapping a second, equal fruit whose connecting path uses <= 3 axis-aligned
segments through empty cells (the one-cell ring outside the board counts as
empty) clears both for 10 points. Emptying the board advances the level.
"""

from __future__ import annotations

import numpy as np

from ..trace import Gesture, GestureKind
from . import draw
from .base import NEXT, Game
from .icons import FRUIT_NAMES, template

BOARD_ROWS = 6
BOARD_COLS = 8
CELL_PITCH = 56
ICON_SIDE = 40
X0, Y0 = 24, 184  # top-left icon corner of cell (0, 0)
CLEAR_SCORE = 10

Cell = tuple[int, int]


class Linkpair(Game):
    game_id = "linkpair"

    def __init__(self, seed: int):
        self.board: list[list[int]] = [[-1] * BOARD_COLS for _ in range(BOARD_ROWS)]
        self.selected: Cell | None = None
        super().__init__(seed)

    # -- board bookkeeping ---------------------------------------------------

    @property
    def matrix(self) -> list[list[int]]:
        return [row.copy() for row in self.board]

    def _enter_play(self) -> None:
        values: list[int] = []
        for _ in range(BOARD_ROWS * BOARD_COLS // 2):
            v = self.rng.randrange(len(FRUIT_NAMES))
            values += [v, v]
        self.rng.shuffle(values)
        self.board = [
            values[r * BOARD_COLS : (r + 1) * BOARD_COLS] for r in range(BOARD_ROWS)
        ]
        self.selected = None
        self._ensure_move()

    def _occupied(self) -> list[Cell]:
        return [
            (r, c)
            for r in range(BOARD_ROWS)
            for c in range(BOARD_COLS)
            if self.board[r][c] >= 0
        ]

    def _any_move(self) -> bool:
        cells = self._occupied()
        for i, a in enumerate(cells):
            for b in cells[i + 1 :]:
                if self.board[a[0]][a[1]] == self.board[b[0]][b[1]] and self.connectable(a, b):
                    return True
        return False

    def _ensure_move(self) -> None:
        # Deadlocks reshuffle the remaining fruits in place (seeded), so the
        # board always offers at least one clearable pair.
        while not self._any_move():
            cells = self._occupied()
            values = [self.board[r][c] for r, c in cells]
            self.rng.shuffle(values)
            for (r, c), v in zip(cells, values):
                self.board[r][c] = v

    def connectable(self, a: Cell, b: Cell) -> bool:
        """Path of <= 3 axis-aligned segments from a to b through empty cells."""

        def passable(r: int, c: int) -> bool:
            if (r, c) == b:
                return True
            if 0 <= r < BOARD_ROWS and 0 <= c < BOARD_COLS:
                return self.board[r][c] < 0
            return -1 <= r <= BOARD_ROWS and -1 <= c <= BOARD_COLS

        frontier = {a}
        seen = {a}
        for _ in range(3):
            reached: set[Cell] = set()
            for r0, c0 in frontier:
                for dr, dc in ((0, 1), (0, -1), (1, 0), (-1, 0)):
                    r, c = r0 + dr, c0 + dc
                    while passable(r, c):
                        if (r, c) == b:
                            return True
                        if (r, c) not in seen:
                            seen.add((r, c))
                            reached.add((r, c))
                        r, c = r + dr, c + dc
            frontier = reached
        return False

    # -- gestures --------------------------------------------------------------

    def _cell_at(self, x: float, y: float) -> Cell | None:
        dx, dy = x - X0, y - Y0
        c, r = int(dx // CELL_PITCH), int(dy // CELL_PITCH)
        if not (0 <= r < BOARD_ROWS and 0 <= c < BOARD_COLS):
            return None
        if dx - c * CELL_PITCH >= ICON_SIDE or dy - r * CELL_PITCH >= ICON_SIDE:
            return None  # in the gutter between icons
        return (r, c)

    def _play_gesture(self, g: Gesture) -> bool:
        if g.kind is not GestureKind.TAP:
            return False
        cell = self._cell_at(g.x_f, g.y_f)
        if cell is None or self.board[cell[0]][cell[1]] < 0:
            return False
        if self.selected is None:
            self.selected = cell
            return True
        if self.selected == cell:
            self.selected = None
            return True
        a, b = self.selected, cell
        if self.board[a[0]][a[1]] == self.board[b[0]][b[1]] and self.connectable(a, b):
            self.board[a[0]][a[1]] = -1
            self.board[b[0]][b[1]] = -1
            self.score += CLEAR_SCORE
            self.selected = None
            if not self._occupied():
                self.scene = NEXT
            else:
                self._ensure_move()
        else:
            self.selected = cell
        return True

    # -- rendering ---------------------------------------------------------------

    def _render_play(self, frame: np.ndarray) -> None:
        for r in range(BOARD_ROWS):
            for c in range(BOARD_COLS):
                v = self.board[r][c]
                if v < 0:
                    continue
                x, y = X0 + c * CELL_PITCH, Y0 + r * CELL_PITCH
                draw.blit(frame, template("linkpair", FRUIT_NAMES[v]), x, y, self.gain)
        if self.selected is not None:
            r, c = self.selected
            x, y = X0 + c * CELL_PITCH, Y0 + r * CELL_PITCH
            draw.outline_rect(frame, x - 5, y - 5, ICON_SIDE + 10, ICON_SIDE + 10, (225, 225, 120))
