"""Procedurally generated icon templates and the shipped asset tree.

Every icon is a deterministic uint8 bitmap built from coordinate masks; the
glyphs are chosen so the luma patterns of icons within one game stay far
apart under normalized correlation. Channel values stay below 232 so a +10%
brightness gain never clips and scaling remains exactly linear.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

RGB = tuple[int, int, int]


def _canvas(size: int, color: RGB) -> np.ndarray:
    out = np.empty((size, size, 3), np.uint8)
    out[:] = color
    return out


def _grids(size: int) -> tuple[np.ndarray, np.ndarray]:
    y, x = np.ogrid[0:size, 0:size]
    return y, x


def _disc(size: int, cx: float, cy: float, r: float) -> np.ndarray:
    y, x = _grids(size)
    return (x - cx) ** 2 + (y - cy) ** 2 <= r * r


def _ring(size: int, cx: float, cy: float, r0: float, r1: float) -> np.ndarray:
    y, x = _grids(size)
    d2 = (x - cx) ** 2 + (y - cy) ** 2
    return (d2 >= r0 * r0) & (d2 <= r1 * r1)


def _paint(img: np.ndarray, mask: np.ndarray, color: RGB) -> np.ndarray:
    img[mask] = color
    return img


def _apple() -> np.ndarray:
    img = _canvas(40, (22, 38, 24))
    _paint(img, _disc(40, 20, 23, 13), (204, 58, 48))
    img[6:13, 18:22] = (90, 140, 60)
    return img


def _banana() -> np.ndarray:
    img = _canvas(40, (26, 24, 42))
    y, x = _grids(40)
    _paint(img, abs(x - y) <= 6, (214, 198, 62))
    return img


def _cherry() -> np.ndarray:
    img = _canvas(40, (30, 24, 26))
    _paint(img, _disc(40, 13, 26, 7), (192, 42, 72))
    _paint(img, _disc(40, 28, 24, 7), (192, 42, 72))
    img[8:11, 12:30] = (80, 120, 60)
    return img


def _grape() -> np.ndarray:
    img = _canvas(40, (24, 28, 26))
    for gy in (9, 20, 31):
        for gx in (9, 20, 31):
            _paint(img, _disc(40, gx, gy, 4.2), (122, 82, 182))
    return img


def _melon() -> np.ndarray:
    img = _canvas(40, (20, 26, 22))
    _paint(img, _ring(40, 20, 20, 10, 14), (92, 198, 92))
    _paint(img, _disc(40, 20, 20, 5.5), (210, 120, 120))
    return img


def _projectile() -> np.ndarray:
    img = _canvas(40, (28, 26, 36))
    _paint(img, _disc(40, 20, 20, 13), (222, 222, 226))
    img[17:23, 4:36] = (52, 48, 84)
    return img


def _board() -> np.ndarray:
    img = _canvas(48, (32, 28, 22))
    _paint(img, _ring(48, 24, 24, 20, 23), (196, 196, 202))
    _paint(img, _ring(48, 24, 24, 12, 16), (202, 82, 58))
    _paint(img, _disc(48, 24, 24, 7), (218, 188, 62))
    return img


def _btn(stripe: str, color: RGB) -> np.ndarray:
    img = _canvas(40, (24, 24, 28))
    y, x = _grids(40)
    inner = (x >= 6) & (x < 34) & (y >= 6) & (y < 34)
    mask = {
        "solid": _disc(40, 20, 20, 13),
        "hbars": inner & (y % 8 < 4),
        "vbars": inner & (x % 8 < 4),
        "diag": inner & ((x + y) % 10 < 5),
        "frame": inner & ~((x >= 12) & (x < 28) & (y >= 12) & (y < 28)),
    }[stripe]
    _paint(img, mask, color)
    return img


def _play() -> np.ndarray:
    img = _canvas(48, (18, 26, 34))
    y, x = _grids(48)
    _paint(img, (x >= 15) & (x <= 37) & (abs(y - 24) <= (37 - x) * 0.72), (64, 214, 122))
    return img


def _next() -> np.ndarray:
    img = _canvas(48, (18, 26, 34))
    y, x = _grids(48)
    d = x - 0.75 * abs(y - 24)
    _paint(img, ((d >= 8) & (d < 16) | (d >= 22) & (d < 30)) & (abs(y - 24) <= 16), (228, 202, 82))
    return img


def _retry() -> np.ndarray:
    img = _canvas(48, (18, 26, 34))
    wedge = np.zeros((48, 48), bool)
    y, x = _grids(48)
    wedge |= (y < 24) & (x > 24)
    _paint(img, _ring(48, 24, 24, 13, 19) & ~wedge, (224, 118, 62))
    img[8:18, 26:36] = (224, 118, 62)
    return img


# name -> (category, builder); insertion order fixes the written file set
GAME_ICONS: dict[str, dict[str, tuple[str, np.ndarray]]] = {}


def _build() -> dict[str, dict[str, tuple[str, np.ndarray]]]:
    fruits = {
        "apple": _apple(),
        "banana": _banana(),
        "cherry": _cherry(),
        "grape": _grape(),
        "melon": _melon(),
    }
    buttons = {
        "amber": _btn("vbars", (226, 178, 46)),
        "olive": _btn("frame", (150, 160, 44)),
        "ruby": _btn("solid", (218, 62, 62)),
        "teal": _btn("hbars", (46, 188, 188)),
        "violet": _btn("diag", (152, 84, 218)),
    }
    return {
        "slingshot": {
            "projectile": ("actionable", _projectile()),
            "board": ("target", _board()),
            "play": ("function", _play()),
            "next": ("function", _next()),
            "retry": ("function", _retry()),
        },
        "linkpair": {
            **{name: ("actionable", img) for name, img in fruits.items()},
            "play": ("function", _play()),
            "next": ("function", _next()),
        },
        "slider": {},
        "buttonrow": {
            **{name: ("actionable", img) for name, img in buttons.items()},
            "play": ("function", _play()),
            "next": ("function", _next()),
        },
    }


GAME_ICONS = _build()

# Actionable names in sorted order; grid matrices index into these lists.
FRUIT_NAMES = sorted(n for n, (cat, _) in GAME_ICONS["linkpair"].items() if cat == "actionable")
BUTTON_NAMES = sorted(n for n, (cat, _) in GAME_ICONS["buttonrow"].items() if cat == "actionable")


def template(game_id: str, name: str) -> np.ndarray:
    return GAME_ICONS[game_id][name][1]


def _write_ppm(path: Path, rgb: np.ndarray) -> None:
    h, w = rgb.shape[:2]
    path.write_bytes(b"P6\n%d %d\n255\n" % (w, h) + rgb.tobytes())


def write_assets(root: Path) -> None:
    """Materialize every game's icon directory under ``root``."""
    for game_id, icons in GAME_ICONS.items():
        game_dir = root / game_id
        game_dir.mkdir(parents=True, exist_ok=True)
        if not icons:
            (game_dir / ".gitkeep").write_bytes(b"")
        for name, (category, img) in icons.items():
            _write_ppm(game_dir / f"{name}.{category}.ppm", img)


ASSET_ROOT = Path(__file__).parent / "assets"


def icon_dir(game_id: str) -> Path:
    if game_id not in GAME_ICONS:
        raise KeyError(game_id)
    return ASSET_ROOT / game_id
