"""Common game-state machinery: seeding, event injection, scene flow.

Games are turn-based: one injected event batch advances the clock one fixed
tick, gets re-segmented into gestures by the trace module, and is interpreted
by game logic. All randomness flows from the game's own seeded RNG and only
inside inject/reset, so whether frames are rendered has no effect on the
trajectory and identical (seed, event byte stream) pairs replay bit-for-bit.
"""

from __future__ import annotations

import random
from abc import ABC, abstractmethod

import numpy as np

from ..trace import Gesture, GestureKind, parse_gestures
from . import draw
from .icons import GAME_ICONS

SCREEN_W = 480
SCREEN_H = 800
TICK_MS = 25

MENU, PLAY, NEXT, RETRY = "menu", "play", "next", "retry"
# Function-button spec name shown by each non-play scene.
SCENE_BUTTON = {MENU: "play", NEXT: "next", RETRY: "retry"}
_BUTTON_XY = (216, 376)  # 48x48 button centered on screen


class Game(ABC):
    """One deterministic 480x800 game run."""

    game_id: str = ""

    def __init__(self, seed: int):
        self.seed = seed
        self.rng = random.Random(seed)
        self.score = 0
        self.level = 0
        self.over = False
        self.scene = MENU
        self.t_ms = 0
        self.gain = 1.0 + self.rng.uniform(-0.1, 0.1)

    # -- event plumbing ----------------------------------------------------

    def inject(self, events: str) -> bool:
        """Apply one recorded/synthesized event batch; True if state changed."""
        changed = False
        for gesture in parse_gestures(events):
            changed |= self._dispatch(gesture)
        self.t_ms += TICK_MS
        self.gain = 1.0 + self.rng.uniform(-0.1, 0.1)
        return changed

    def _dispatch(self, g: Gesture) -> bool:
        if self.scene == PLAY:
            return self._play_gesture(g)
        # Menu-family scenes: the button taps through, and any swipe also
        # advances so a random player can never wedge on an end screen.
        if g.kind is GestureKind.SWIPE or self._on_button(g):
            self._leave_menu()
            return True
        return False

    def _on_button(self, g: Gesture) -> bool:
        bx, by = _BUTTON_XY
        return g.kind is GestureKind.TAP and bx <= g.x_f < bx + 48 and by <= g.y_f < by + 48

    def _leave_menu(self) -> None:
        if self.scene == MENU:
            self.level = 1
        elif self.scene == NEXT:
            self.level += 1
        self.scene = PLAY
        self._enter_play()

    # -- rendering ----------------------------------------------------------

    def render(self) -> np.ndarray:
        frame = draw.background(SCREEN_W, SCREEN_H)
        if self.scene == PLAY:
            self._render_play(frame)
        else:
            self._render_menu(frame)
        return frame

    def _render_menu(self, frame: np.ndarray) -> None:
        name = SCENE_BUTTON[self.scene]
        icons = GAME_ICONS[self.game_id]
        if name in icons:
            draw.blit(frame, icons[name][1], *_BUTTON_XY, self.gain)
        else:  # slider ships no icon specs; draw an unrecognizable stand-in
            draw.fill_rect(frame, 216, 376, 48, 48, (40, 70, 100))
            draw.fill_rect(frame, 232, 388, 16, 24, (190, 210, 220))

    # -- game-specific hooks -------------------------------------------------

    @abstractmethod
    def _enter_play(self) -> None: ...

    @abstractmethod
    def _play_gesture(self, g: Gesture) -> bool: ...

    @abstractmethod
    def _render_play(self, frame: np.ndarray) -> None: ...
