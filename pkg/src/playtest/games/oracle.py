"""Scripted ground-truth players used to record demonstration sessions.

Policies read internal game state (they stand in for the human player, not
for the analysis pipeline) and emit one action's gestures per call: 90% are
near-optimal moves, 10% deliberate noise of the opposite gesture kind, and
menu scenes are always answered with the scene's button (slider, having no
button icon, is answered with a swipe).
"""

from __future__ import annotations

import math
import random

from ..trace import Gesture
from .base import PLAY, Game
from .buttonrow import BUTTON_PITCH, BUTTON_SIDE, BUTTON_X0, BUTTON_Y, FIELD_SIDE, Buttonrow
from .linkpair import CELL_PITCH, ICON_SIDE, X0, Y0, Linkpair
from .slider import Slider
from .slingshot import LAUNCH, Slingshot

NOISE_RATE = 0.1
_MENU_XY = (240.0, 400.0)


class Policy:
    """One game's scripted player; deterministic per (game_id, seed)."""

    def __init__(self, game_id: str, seed: int):
        self.rng = random.Random(f"{game_id}:{seed}")

    def __call__(self, game: Game) -> list[Gesture]:
        if game.scene != PLAY:
            return self._menu_action(game)
        if self.rng.random() < NOISE_RATE:
            return [self._noise(game)]
        return self._play_action(game)

    def _menu_action(self, game: Game) -> list[Gesture]:
        return [Gesture.tap(*_MENU_XY, self.rng.uniform(0.05, 0.09))]

    def _tap_noise(self) -> Gesture:
        return Gesture.tap(self.rng.uniform(20, 460), self.rng.uniform(20, 780), 0.06)

    def _swipe_noise(self) -> Gesture:
        x, y = self.rng.uniform(100, 380), self.rng.uniform(100, 700)
        ang = self.rng.uniform(0, 2 * math.pi)
        d = self.rng.uniform(40, 90)
        return Gesture.swipe(x, y, x + d * math.cos(ang), y + d * math.sin(ang), 0.2)

    def _noise(self, game: Game) -> Gesture:
        raise NotImplementedError

    def _play_action(self, game: Game) -> list[Gesture]:
        raise NotImplementedError


class SlingshotPolicy(Policy):
    def _noise(self, game):  # play actions are swipes, so noise taps
        return self._tap_noise()

    def _play_action(self, game: Slingshot) -> list[Gesture]:
        tx, ty = game.board_xy[0] + 24.0, game.board_xy[1] + 24.0
        aim = math.atan2(ty - LAUNCH[1], tx - LAUNCH[0])
        pull = aim + math.pi + self.rng.uniform(-0.01, 0.01)
        dist = self.rng.uniform(80, 150)
        dur = self.rng.uniform(0.35, 0.6)
        end = (LAUNCH[0] + dist * math.cos(pull), LAUNCH[1] + dist * math.sin(pull))
        return [Gesture.swipe(*LAUNCH, *end, dur)]


class LinkpairPolicy(Policy):
    def _noise(self, game):
        return self._swipe_noise()

    def _play_action(self, game: Linkpair) -> list[Gesture]:
        pair = self._best_pair(game)
        if pair is None:  # unreachable while the game guarantees a move
            return [self._swipe_noise()]
        taps = []
        for r, c in pair:
            x = X0 + c * CELL_PITCH + ICON_SIDE / 2
            y = Y0 + r * CELL_PITCH + ICON_SIDE / 2
            taps.append(Gesture.tap(x, y, self.rng.uniform(0.05, 0.09)))
        return taps

    def _best_pair(self, game: Linkpair):
        cells = [
            (r, c)
            for r in range(len(game.board))
            for c in range(len(game.board[0]))
            if game.board[r][c] >= 0
        ]
        best = None
        for i, a in enumerate(cells):
            for b in cells[i + 1 :]:
                if game.board[a[0]][a[1]] != game.board[b[0]][b[1]]:
                    continue
                gap = abs(a[0] - b[0]) + abs(a[1] - b[1])
                key = (gap, a, b)
                if (best is None or key < best) and game.connectable(a, b):
                    best = key
        return None if best is None else (best[1], best[2])


class SliderPolicy(Policy):
    # Near-uniform: on this game a demonstrator has no real directional edge.
    WEIGHTS = (("up", 0.3), ("left", 0.25), ("right", 0.25), ("down", 0.2))
    _ANGLES = {"up": -math.pi / 2, "down": math.pi / 2, "left": math.pi, "right": 0.0}

    def _menu_action(self, game):  # no button icon to tap; swipe through
        return self._play_action(game)

    def _noise(self, game):
        return self._tap_noise()

    def _play_action(self, game: Slider) -> list[Gesture]:
        pick = self.rng.random()
        acc = 0.0
        direction = self.WEIGHTS[-1][0]
        for name, w in self.WEIGHTS:
            acc += w
            if pick < acc:
                direction = name
                break
        ang = self._ANGLES[direction] + self.rng.uniform(-0.3, 0.3)
        x, y = self.rng.uniform(200, 280), self.rng.uniform(380, 460)
        d = self.rng.uniform(110, 180)
        dur = self.rng.uniform(0.22, 0.42)
        return [Gesture.swipe(x, y, x + d * math.cos(ang), y + d * math.sin(ang), dur)]


class ButtonrowPolicy(Policy):
    def _noise(self, game):
        return self._swipe_noise()

    def _play_action(self, game: Buttonrow) -> list[Gesture]:
        current = game.field[0][0]
        region = game.region()
        gains = []
        for k in range(5):
            if k == current:
                continue
            gains.append((self._gain(game.field, region, k), -k))
        _, neg_k = max(gains)
        k = -neg_k
        x = BUTTON_X0 + k * BUTTON_PITCH + BUTTON_SIDE / 2
        y = BUTTON_Y + BUTTON_SIDE / 2
        return [Gesture.tap(x, y, self.rng.uniform(0.05, 0.09))]

    @staticmethod
    def _gain(field, region, k: int) -> int:
        trial = [row.copy() for row in field]
        for r, c in region:
            trial[r][c] = k
        seen = {(0, 0)}
        stack = [(0, 0)]
        while stack:
            r, c = stack.pop()
            for rr, cc in ((r + 1, c), (r - 1, c), (r, c + 1), (r, c - 1)):
                if (
                    0 <= rr < FIELD_SIDE
                    and 0 <= cc < FIELD_SIDE
                    and (rr, cc) not in seen
                    and trial[rr][cc] == k
                ):
                    seen.add((rr, cc))
                    stack.append((rr, cc))
        return len(seen) - len(region)


POLICIES: dict[str, type[Policy]] = {
    "slingshot": SlingshotPolicy,
    "linkpair": LinkpairPolicy,
    "slider": SliderPolicy,
    "buttonrow": ButtonrowPolicy,
}


def make_policy(game_id: str, seed: int) -> Policy:
    return POLICIES[game_id](game_id, seed)
