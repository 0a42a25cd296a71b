"""Four deterministic, seedable test games sharing one 480x800 screen.

Each game exists to exercise one application rule: slingshot pulls toward a
target (plus menu buttons), linkpair clears grid patterns, slider reacts to
bare swipes on an icon-free screen, and buttonrow taps a single row of color
buttons. Analysis code never imports this package; frames and injected event
text are the only crossing points.
"""

from __future__ import annotations

import numpy as np

from .base import MENU, NEXT, PLAY, RETRY, SCREEN_H, SCREEN_W, TICK_MS, Game
from .buttonrow import Buttonrow
from .icons import ASSET_ROOT, GAME_ICONS, write_assets
from .linkpair import Linkpair
from .slider import Slider
from .slingshot import Slingshot


class UnknownGame(Exception):
    pass


GAME_TYPES: dict[str, type[Game]] = {
    "slingshot": Slingshot,
    "linkpair": Linkpair,
    "slider": Slider,
    "buttonrow": Buttonrow,
}

# The rule each game is built to exercise; every game's menus exercise the
# Function-anchored rule on top (slider's menu ships no recognizable icon).
GAME_RULES = {
    "slingshot": "R3",
    "linkpair": "R4",
    "slider": "R1",
    "buttonrow": "R5",
}

GAME_IDS = tuple(GAME_TYPES)


def reset(game_id: str, seed: int) -> Game:
    if game_id not in GAME_TYPES:
        raise UnknownGame(game_id)
    return GAME_TYPES[game_id](seed)


def inject(state: Game, events: str) -> bool:
    return state.inject(events)


def render(state: Game) -> np.ndarray:
    return state.render()


def icon_dir(game_id: str):
    if game_id not in GAME_TYPES:
        raise UnknownGame(game_id)
    return ASSET_ROOT / game_id
