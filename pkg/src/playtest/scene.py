"""Frame perception: icon matching, grid detection, abstract context extraction.

Icons are matched by normalized cross-correlation of grayscale intensities.
The score map over all valid offsets is computed with an FFT numerator and
integral-image window statistics; candidate peaks are then rescored with a
direct dot product so reported scores do not inherit FFT roundoff.
"""

from __future__ import annotations

import logging
import math
import re
import statistics
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from scipy import fft as spfft

log = logging.getLogger(__name__)

SCORE_THRESHOLD = 0.90
IOU_LIMIT = 0.3
GRID_GAP_FACTOR = 0.6
GRID_MIN_OCCUPANCY = 0.5

# Window-variance sums below this are treated as flat (score forced to 0).
_VAR_EPS = 1e-2
# FFT search margin: peaks within this of the threshold are rescored exactly.
_SEARCH_MARGIN = 1e-3

_ICON_FILE_RE = re.compile(r"^(?P<name>[A-Za-z0-9_-]+)\.(?P<category>actionable|function|target)\.ppm$")


class SceneError(Exception):
    pass


class TemplateTooLarge(SceneError):
    def __init__(self, spec_name: str, tpl_shape: tuple[int, int], frame_shape: tuple[int, int]):
        super().__init__(
            f"template {spec_name!r} {tpl_shape} must be strictly smaller than frame {frame_shape}"
        )


class IconCategory(Enum):
    ACTIONABLE = "actionable"
    FUNCTION = "function"
    TARGET = "target"


@dataclass
class Frame:
    rgb: np.ndarray  # (h, w, 3) uint8
    t_ms: int = 0

    @property
    def width(self) -> int:
        return self.rgb.shape[1]

    @property
    def height(self) -> int:
        return self.rgb.shape[0]


@dataclass
class IconSpec:
    name: str
    category: IconCategory
    template: np.ndarray  # (h, w, 3) uint8
    _cache: dict = field(default_factory=dict, repr=False, compare=False)


@dataclass
class IconInstance:
    spec: IconSpec
    bbox: tuple[int, int, int, int]  # x, y, w, h
    score: float

    @property
    def centroid(self) -> tuple[float, float]:
        x, y, w, h = self.bbox
        return (x + w / 2, y + h / 2)

    def contains(self, px: float, py: float) -> bool:
        x, y, w, h = self.bbox
        return x <= px < x + w and y <= py < y + h


@dataclass(frozen=True)
class AbstractContext:
    categories: frozenset[IconCategory]
    grid_present: bool

    def describe(self) -> str:
        names = sorted(c.value for c in self.categories)
        return "{" + ",".join(names) + "}" + ("+grid" if self.grid_present else "")


@dataclass
class GridLayout:
    rows: int
    cols: int
    row_centers: list[float]
    col_centers: list[float]
    matrix: list[list[int]]  # spec index per cell, -1 when empty
    cells: dict[tuple[int, int], IconInstance]

    def cell_of(self, inst: IconInstance) -> tuple[int, int]:
        cx, cy = inst.centroid
        r = min(range(self.rows), key=lambda i: abs(self.row_centers[i] - cy))
        c = min(range(self.cols), key=lambda j: abs(self.col_centers[j] - cx))
        return (r, c)


@dataclass
class Context:
    frame: Frame
    instances: list[IconInstance]
    grid: GridLayout | None
    signature: AbstractContext

    def by_category(self, category: IconCategory) -> list[IconInstance]:
        return [i for i in self.instances if i.spec.category is category]


def read_ppm(path: str | Path) -> np.ndarray:
    """Read a binary (P6, maxval 255) image accepting header comments."""
    data = Path(path).read_bytes()
    tokens: list[bytes] = []
    i = 0
    while len(tokens) < 4:
        if i >= len(data):
            raise ValueError(f"{path}: truncated header")
        ch = data[i : i + 1]
        if ch == b"#":
            i = data.find(b"\n", i)
            if i < 0:
                raise ValueError(f"{path}: unterminated comment")
            continue
        if ch.isspace():
            i += 1
            continue
        j = i
        while j < len(data) and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
            j += 1
        tokens.append(data[i:j])
        i = j
    if tokens[0] != b"P6":
        raise ValueError(f"{path}: not a P6 file (magic {tokens[0]!r})")
    w, h, maxval = (int(t) for t in tokens[1:4])
    if maxval != 255:
        raise ValueError(f"{path}: unsupported maxval {maxval}")
    i += 1  # single whitespace byte after maxval
    raster = data[i : i + w * h * 3]
    if len(raster) != w * h * 3:
        raise ValueError(f"{path}: raster has {len(raster)} bytes, expected {w * h * 3}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w, 3).copy()


def write_ppm(path: str | Path, rgb: np.ndarray) -> None:
    if rgb.dtype != np.uint8 or rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("expected (h, w, 3) uint8 array")
    h, w = rgb.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode())
        fh.write(rgb.tobytes())


def load_icon_dir(path: str | Path) -> list[IconSpec]:
    """Load ``<name>.<category>.ppm`` templates, sorted by name.

    An icon-less directory is legal (icon-free games force the anything-goes
    rule) and yields an empty list with a warning.
    """
    specs = []
    for p in sorted(Path(path).iterdir()):
        m = _ICON_FILE_RE.match(p.name)
        if m is None:
            continue
        specs.append(IconSpec(m["name"], IconCategory(m["category"]), read_ppm(p)))
    if not specs:
        log.warning("no icon templates found in %s", path)
    return sorted(specs, key=lambda s: s.name)


def grayscale(rgb: np.ndarray) -> np.ndarray:
    return rgb.astype(np.float64).sum(axis=2) / 3.0


def _integral(img: np.ndarray) -> np.ndarray:
    H, W = img.shape
    ii = np.zeros((H + 1, W + 1))
    ii[1:, 1:] = img.cumsum(axis=0).cumsum(axis=1)
    return ii


def _window_sums(ii: np.ndarray, th: int, tw: int) -> np.ndarray:
    # S[u, v] = sum of the th x tw window at offset (u, v).
    oh, ow = ii.shape[0] - th, ii.shape[1] - tw
    return ii[th:, tw:] - ii[:oh, tw:] - ii[th:, :ow] + ii[:oh, :ow]


class _FramePlan:
    """Frame-side FFT and integral images, shared across all templates.

    The correlation numerator runs in float32: its error (~1e-5 after
    normalization) is far below the search margin, and every reported score
    is rescored with an exact float64 dot product anyway.
    """

    __slots__ = ("shape", "fft", "ii", "ii2", "sums")

    def __init__(self, frame_gray: np.ndarray):
        self.shape = frame_gray.shape
        self.fft = spfft.rfft2(frame_gray.astype(np.float32))
        self.ii = _integral(frame_gray)
        self.ii2 = _integral(frame_gray * frame_gray)
        self.sums: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}

    def window_sums(self, th: int, tw: int) -> tuple[np.ndarray, np.ndarray]:
        key = (th, tw)
        if key not in self.sums:
            self.sums[key] = (_window_sums(self.ii, th, tw), _window_sums(self.ii2, th, tw))
        return self.sums[key]


def _template_base(spec: IconSpec) -> tuple[np.ndarray, float]:
    cached = spec._cache.get("base")
    if cached is None:
        t0 = grayscale(spec.template)
        t0 = t0 - t0.mean()
        t0 -= t0.sum() / t0.size  # second pass pins the residual mean near 0
        cached = (t0, float((t0 * t0).sum()))
        spec._cache["base"] = cached
    return cached


def _template_fft(spec: IconSpec, frame_shape: tuple[int, int], dtype=np.float64) -> np.ndarray:
    key = (frame_shape, np.dtype(dtype).str)
    tconj = spec._cache.get(key)
    if tconj is None:
        t0, _ = _template_base(spec)
        tconj = spfft.rfft2(t0.astype(dtype), s=frame_shape).conj()
        spec._cache[key] = tconj
    return tconj


def ncc_score_map(
    frame_gray: np.ndarray, spec: IconSpec, plan: _FramePlan | None = None
) -> np.ndarray:
    """NCC of the template against every valid offset of the frame.

    Offsets whose window is flat (zero variance) score exactly 0 instead of
    dividing by zero; scores are clipped to [-1, 1]. Callers scoring many
    templates against one frame can pass a shared plan.
    """
    H, W = frame_gray.shape
    th, tw = spec.template.shape[:2]
    if th >= H or tw >= W:
        raise TemplateTooLarge(spec.name, (th, tw), (H, W))
    _t0, t_ss = _template_base(spec)
    oh, ow = H - th + 1, W - tw + 1
    if t_ss <= 1e-12:
        return np.zeros((oh, ow))
    if plan is None:
        corr = spfft.irfft2(spfft.rfft2(frame_gray) * _template_fft(spec, (H, W)), s=(H, W))[:oh, :ow]
        s1 = _window_sums(_integral(frame_gray), th, tw)
        s2 = _window_sums(_integral(frame_gray * frame_gray), th, tw)
    else:
        tconj = _template_fft(spec, (H, W), np.float32)
        corr = spfft.irfft2(plan.fft * tconj, s=(H, W))[:oh, :ow].astype(np.float64)
        s1, s2 = plan.window_sums(th, tw)
    var = np.maximum(s2 - s1 * s1 / (th * tw), 0.0)
    denom = np.sqrt(var * t_ss)
    with np.errstate(divide="ignore", invalid="ignore"):
        score = np.where(var > _VAR_EPS, corr / np.where(denom > 0, denom, 1.0), 0.0)
    return np.clip(score, -1.0, 1.0)


def _rescore(frame_gray: np.ndarray, spec: IconSpec, u: int, v: int) -> float:
    t0, _ = _template_base(spec)
    th, tw = t0.shape
    win = frame_gray[u : u + th, v : v + tw]
    w0 = win - win.mean()
    denom = math.sqrt(float((w0 * w0).sum()) * float((t0 * t0).sum()))
    if denom <= 1e-9:
        return 0.0
    return float(np.clip(float((w0 * t0).sum()) / denom, -1.0, 1.0))


def _iou(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> float:
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    ix = max(0, min(ax + aw, bx + bw) - max(ax, bx))
    iy = max(0, min(ay + ah, by + bh) - max(ay, by))
    inter = ix * iy
    union = aw * ah + bw * bh - inter
    return inter / union if union else 0.0


def match_icons(
    frame: Frame, specs: list[IconSpec], theta: float = SCORE_THRESHOLD
) -> list[IconInstance]:
    """All template placements scoring >= theta, deduplicated by greedy NMS.

    Candidates are local maxima of the score map; overlapping candidates
    (IoU > 0.3 with an accepted instance) are suppressed best-score-first.
    Returned instances are sorted by position for stable output.
    """
    frame_gray = grayscale(frame.rgb)
    plan = _FramePlan(frame_gray) if specs else None
    candidates: list[tuple[float, str, int, int, IconSpec]] = []
    for spec in specs:
        smap = ncc_score_map(frame_gray, spec, plan)
        for u, v in np.argwhere(smap >= theta - _SEARCH_MARGIN):
            u, v = int(u), int(v)
            # Local maximum over the 3x3 neighborhood, plateaus included.
            if smap[u, v] < smap[max(0, u - 1) : u + 2, max(0, v - 1) : v + 2].max():
                continue
            score = _rescore(frame_gray, spec, u, v)
            if score >= theta:
                candidates.append((score, spec.name, u, v, spec))
    candidates.sort(key=lambda c: (-c[0], c[1], c[2], c[3]))
    accepted: list[IconInstance] = []
    for score, _name, u, v, spec in candidates:
        th_, tw_ = spec.template.shape[:2]
        bbox = (v, u, tw_, th_)
        if all(_iou(bbox, a.bbox) <= IOU_LIMIT for a in accepted):
            accepted.append(IconInstance(spec, bbox, score))
    accepted.sort(key=lambda i: (i.bbox[1], i.bbox[0], i.spec.name))
    return accepted


def _cluster_axis(values: list[float], gap: float) -> list[list[float]]:
    groups: list[list[float]] = []
    for val in sorted(values):
        if groups and val - groups[-1][-1] <= gap:
            groups[-1].append(val)
        else:
            groups.append([val])
    return groups


def detect_grid(
    instances: list[IconInstance], index_of: dict[str, int] | None = None
) -> GridLayout | None:
    """Fit a regular grid over instance centroids, or None if there is none.

    Centroids are clustered per axis with a gap threshold of 0.6x the median
    bbox side; a grid needs >= 2 rows, >= 2 columns, >= 50% occupancy and
    every centroid within half a gap of its row and column line.  Matrix
    values index sorted spec names (-1 for empty cells) unless an explicit
    name -> index mapping is supplied.
    """
    if len(instances) < 2:
        return None
    if index_of is None:
        names = sorted({i.spec.name for i in instances})
        index_of = {n: k for k, n in enumerate(names)}
    sides: list[float] = []
    for inst in instances:
        sides.extend(inst.bbox[2:])
    gap = GRID_GAP_FACTOR * statistics.median(sides)
    xs = [i.centroid[0] for i in instances]
    ys = [i.centroid[1] for i in instances]
    col_groups = _cluster_axis(xs, gap)
    row_groups = _cluster_axis(ys, gap)
    rows, cols = len(row_groups), len(col_groups)
    if rows < 2 or cols < 2:
        return None
    row_centers = [sum(g) / len(g) for g in row_groups]
    col_centers = [sum(g) / len(g) for g in col_groups]
    cells: dict[tuple[int, int], IconInstance] = {}
    for inst in instances:
        cx, cy = inst.centroid
        r = min(range(rows), key=lambda i: abs(row_centers[i] - cy))
        c = min(range(cols), key=lambda j: abs(col_centers[j] - cx))
        if abs(row_centers[r] - cy) > gap / 2 or abs(col_centers[c] - cx) > gap / 2:
            return None  # irregular spacing: not a grid
        cells.setdefault((r, c), inst)
    if len(cells) / (rows * cols) < GRID_MIN_OCCUPANCY:
        return None
    matrix = [[-1] * cols for _ in range(rows)]
    for (r, c), inst in cells.items():
        matrix[r][c] = index_of[inst.spec.name]
    return GridLayout(rows, cols, row_centers, col_centers, matrix, cells)


def context_signature(
    instances: list[IconInstance], grid: GridLayout | None
) -> AbstractContext:
    return AbstractContext(frozenset(i.spec.category for i in instances), grid is not None)


def build_context(
    frame: Frame, specs: list[IconSpec], theta: float = SCORE_THRESHOLD
) -> Context:
    """Match icons, detect the actionable grid and derive the signature."""
    instances = match_icons(frame, specs, theta)
    actionable_names = sorted(s.name for s in specs if s.category is IconCategory.ACTIONABLE)
    index_of = {n: k for k, n in enumerate(actionable_names)}
    actionable = [i for i in instances if i.spec.category is IconCategory.ACTIONABLE]
    grid = detect_grid(actionable, index_of)
    return Context(frame, instances, grid, context_signature(instances, grid))
