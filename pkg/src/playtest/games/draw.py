"""Small software-rendering helpers shared by the games.

Everything draws into plain uint8 RGB arrays so the games stay free of any
scene-analysis imports; frames cross the module boundary as raw pixels.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=8)
def _background(w: int, h: int) -> np.ndarray:
    """Textured but low-variance backdrop: soft gradient plus a faint checker.

    Kept dim and smooth so template windows over bare background never clear
    the matching threshold, and so shipped frames compress well.
    """
    ys = np.linspace(28.0, 58.0, h, dtype=np.float64)[:, None]
    base = np.broadcast_to(ys, (h, w)).copy()
    cy, cx = np.ogrid[0:h, 0:w]
    checker = (((cy // 32) + (cx // 32)) % 2).astype(np.float64) * 3.0
    luma = base + checker
    rgb = np.empty((h, w, 3), np.uint8)
    rgb[..., 0] = np.clip(luma * 0.9, 0, 255).astype(np.uint8)
    rgb[..., 1] = np.clip(luma, 0, 255).astype(np.uint8)
    rgb[..., 2] = np.clip(luma * 1.15, 0, 255).astype(np.uint8)
    rgb.setflags(write=False)
    return rgb


def background(w: int, h: int) -> np.ndarray:
    return _background(w, h).copy()


def blit(frame: np.ndarray, template: np.ndarray, x: int, y: int, gain: float = 1.0) -> None:
    """Composite a template at (x, y) top-left with a uniform brightness gain.

    The gain is applied to the template alone; icon luma stays below the
    clipping point at gain 1.1 so the scaling remains exactly linear.
    """
    th, tw = template.shape[:2]
    scaled = np.clip(np.rint(template.astype(np.float64) * gain), 0, 255).astype(np.uint8)
    frame[y : y + th, x : x + tw] = scaled


def fill_rect(frame: np.ndarray, x: int, y: int, w: int, h: int, color: tuple[int, int, int]) -> None:
    frame[y : y + h, x : x + w] = color


def outline_rect(
    frame: np.ndarray, x: int, y: int, w: int, h: int, color: tuple[int, int, int], thickness: int = 2
) -> None:
    t = thickness
    frame[y : y + t, x : x + w] = color
    frame[y + h - t : y + h, x : x + w] = color
    frame[y : y + h, x : x + t] = color
    frame[y : y + h, x + w - t : x + w] = color
