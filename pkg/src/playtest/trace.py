"""Multitouch event traces: parsing, gesture segmentation, classification, emission.

The on-disk format is the line-per-event dump produced by ``getevent -lt``
on a touch device: a bracketed timestamp, the device node, an event type,
an event code, and a hex value.  A gesture occupies one tracking segment
(TRACKING_ID open .. TRACKING_ID 0xffffffff close); coordinate reports
inside the segment are grouped by SYN_REPORT lines.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from enum import Enum

log = logging.getLogger(__name__)

DEVICE = "/dev/input/event2"
TRACKING_CLOSE = 0xFFFFFFFF

# Swipe/Tap threshold (px).  dist >= 20 is a swipe regardless of duration;
# the duration bounds only matter through dist for well-formed gestures.
DIST_THRESHOLD = 20.0
DUR_THRESHOLD = 0.2

# Serialization knobs.
SWIPE_REPORTS = 16          # coordinate reports per emitted swipe (endpoints included)
GESTURE_GAP = 0.05          # seconds between gestures of one action

_EVENT_RE = re.compile(
    r"^\[\s*(\d+)\.(\d{6})\]\s+(\S+):\s+(\S+)\s+(\S+)\s+([0-9a-fA-F]+)\s*$"
)


class TraceError(Exception):
    """Base class for trace parsing/serialization failures."""


class MalformedLine(TraceError):
    def __init__(self, line_no: int, line: str, why: str):
        self.line_no = line_no
        self.line = line
        super().__init__(f"line {line_no}: {why}: {line!r}")


class OutOfBounds(TraceError):
    def __init__(self, x: float, y: float, bounds: tuple[int, int]):
        super().__init__(f"point ({x}, {y}) outside {bounds[0]}x{bounds[1]} screen")


class EventCode(Enum):
    TRACKING_ID = "ABS_MT_TRACKING_ID"
    POSITION_X = "ABS_MT_POSITION_X"
    POSITION_Y = "ABS_MT_POSITION_Y"
    SYN_REPORT = "SYN_REPORT"
    OTHER = "OTHER"


class GestureKind(Enum):
    TAP = "tap"
    SWIPE = "swipe"


@dataclass
class TraceEvent:
    ts: float
    code: EventCode
    value: int
    raw: str = ""


@dataclass
class RawSegment:
    """One tracking segment: the events between an open and a close marker."""

    events: list[TraceEvent]
    x_f: int
    y_f: int
    x_l: int
    y_l: int
    ts_f: float
    ts_l: float
    dangling: bool = False


@dataclass
class Gesture:
    kind: GestureKind
    x_f: float
    y_f: float
    x_l: float
    y_l: float
    dist: float
    dur: float
    sinx: float | None

    @staticmethod
    def tap(x: float, y: float, dur: float) -> Gesture:
        return Gesture(GestureKind.TAP, x, y, x, y, 0.0, dur, None)

    @staticmethod
    def swipe(x0: float, y0: float, x1: float, y1: float, dur: float) -> Gesture:
        dist = math.hypot(x1 - x0, y1 - y0)
        sinx = (y1 - y0) / dist if dist > 0 else None
        return Gesture(GestureKind.SWIPE, x0, y0, x1, y1, dist, dur, sinx)

    @property
    def start(self) -> tuple[float, float]:
        return (self.x_f, self.y_f)

    @property
    def end(self) -> tuple[float, float]:
        return (self.x_l, self.y_l)


@dataclass
class Action:
    """An ordered burst of gestures performed against one frame."""

    gestures: list[Gesture] = field(default_factory=list)
    demo_ts: int = 0


def _parse_hex(text: str, line_no: int, line: str) -> int:
    value = int(text, 16)
    if value > 0xFFFFFFFF:
        raise MalformedLine(line_no, line, "value exceeds 32 bits")
    return value


def parse_trace(text: str) -> list[TraceEvent]:
    """Parse a getevent-style dump into typed events.

    Header lines (``add device``, ``name:`` and other non-bracketed noise)
    become OTHER events with their raw text retained.  A bracketed line that
    does not scan raises MalformedLine with its 1-based line number.
    """
    events: list[TraceEvent] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if not line.strip():
            continue
        if not line.lstrip().startswith("["):
            events.append(TraceEvent(0.0, EventCode.OTHER, 0, line))
            continue
        m = _EVENT_RE.match(line)
        if m is None:
            raise MalformedLine(line_no, line, "does not match event grammar")
        sec, usec, _device, ev_type, code, value_hex = m.groups()
        ts = int(sec) + int(usec) / 1_000_000
        if ev_type == "EV_ABS" and code == EventCode.TRACKING_ID.value:
            events.append(TraceEvent(ts, EventCode.TRACKING_ID, _parse_hex(value_hex, line_no, line), line))
        elif ev_type == "EV_ABS" and code == EventCode.POSITION_X.value:
            events.append(TraceEvent(ts, EventCode.POSITION_X, _parse_hex(value_hex, line_no, line), line))
        elif ev_type == "EV_ABS" and code == EventCode.POSITION_Y.value:
            events.append(TraceEvent(ts, EventCode.POSITION_Y, _parse_hex(value_hex, line_no, line), line))
        elif ev_type == "EV_SYN" and code == EventCode.SYN_REPORT.value:
            events.append(TraceEvent(ts, EventCode.SYN_REPORT, _parse_hex(value_hex, line_no, line), line))
        else:
            events.append(TraceEvent(ts, EventCode.OTHER, 0, line))
    return events


def segment_gestures(events: list[TraceEvent]) -> list[RawSegment]:
    """Split an event stream into tracking segments.

    A segment opens at a TRACKING_ID with value != 0xffffffff and closes at
    the 0xffffffff marker.  A bare 0x00000000 closes the open segment if one
    exists (it is a valid id on open otherwise).  A new open while a segment
    is open closes the previous one at the new marker's timestamp.  A segment
    still open at end-of-stream is closed there and flagged dangling; segments
    without any complete coordinate report are dropped with a warning.
    """
    segments: list[RawSegment] = []
    cur_events: list[TraceEvent] | None = None
    ts_open = 0.0
    points: list[tuple[int, int]] = []
    last_x: int | None = None
    last_y: int | None = None
    dirty = False

    def flush_point() -> None:
        nonlocal dirty
        if dirty and last_x is not None and last_y is not None:
            points.append((last_x, last_y))
            dirty = False

    def close(ts: float, dangling: bool) -> None:
        nonlocal cur_events, last_x, last_y, dirty
        assert cur_events is not None
        flush_point()
        if not points:
            log.warning("dropping tracking segment at %.6f with no coordinates", ts_open)
        else:
            x_f, y_f = points[0]
            x_l, y_l = points[-1]
            segments.append(RawSegment(cur_events, x_f, y_f, x_l, y_l, ts_open, ts, dangling))
        cur_events = None
        points.clear()
        last_x = last_y = None
        dirty = False

    last_ts = 0.0
    for ev in events:
        if ev.code is EventCode.TRACKING_ID:
            if ev.value == TRACKING_CLOSE:
                if cur_events is not None:
                    cur_events.append(ev)
                    close(ev.ts, dangling=False)
                else:
                    log.warning("stray close marker at %.6f", ev.ts)
            else:
                if cur_events is not None:
                    if ev.value == 0:
                        # bare zero inside a segment acts as a close
                        cur_events.append(ev)
                        close(ev.ts, dangling=False)
                        continue
                    log.warning("segment reopened at %.6f without close", ev.ts)
                    close(ev.ts, dangling=True)
                cur_events = [ev]
                ts_open = ev.ts
        elif cur_events is not None:
            cur_events.append(ev)
            if ev.code is EventCode.POSITION_X:
                last_x = ev.value
                dirty = True
            elif ev.code is EventCode.POSITION_Y:
                last_y = ev.value
                dirty = True
            elif ev.code is EventCode.SYN_REPORT:
                flush_point()
        if ev.code is not EventCode.OTHER or ev.ts:
            last_ts = max(last_ts, ev.ts)
    if cur_events is not None:
        log.warning("trace ends with open segment from %.6f", ts_open)
        close(max(last_ts, ts_open), dangling=True)
    return segments


def classify_segment(seg: RawSegment) -> Gesture:
    """Reduce a segment to a gesture: distance/duration stats plus the kind.

    dist >= 20 px is a swipe, anything shorter is a tap; sinx is the
    vertical fraction of the displacement and only defined for swipes.
    """
    dist = math.hypot(seg.x_l - seg.x_f, seg.y_l - seg.y_f)
    dur = seg.ts_l - seg.ts_f
    if dist >= DIST_THRESHOLD:
        sinx = (seg.y_l - seg.y_f) / dist
        return Gesture(GestureKind.SWIPE, seg.x_f, seg.y_f, seg.x_l, seg.y_l, dist, dur, sinx)
    return Gesture(GestureKind.TAP, seg.x_f, seg.y_f, seg.x_l, seg.y_l, dist, dur, None)


def parse_gestures(text: str) -> list[Gesture]:
    return [classify_segment(s) for s in segment_gestures(parse_trace(text))]


def _fmt(ts: float, code: str, value: int) -> str:
    return f"[ {ts:.6f}] {DEVICE}: {'EV_SYN' if code == 'SYN_REPORT' else 'EV_ABS'} {code} {value:08x}"


def emit_trace(
    action: Action,
    base_ts: float = 0.0,
    bounds: tuple[int, int] = (480, 800),
    gap: float = GESTURE_GAP,
) -> str:
    """Serialize an action back to the event grammar.

    Taps produce a single coordinate report; swipes are linearized into
    SWIPE_REPORTS uniformly spaced reports.  Tracking ids increase
    monotonically across the action and gestures are separated by ``gap``
    seconds.  Coordinates are rounded to device pixels and bounds-checked.
    """
    if not action.gestures:
        raise ValueError("action must contain at least one gesture")
    w, h = bounds
    lines: list[str] = []
    t = base_ts
    for track_id, g in enumerate(action.gestures, start=1):
        pts = [(g.x_f, g.y_f)] if g.kind is GestureKind.TAP else [
            (
                g.x_f + (g.x_l - g.x_f) * i / (SWIPE_REPORTS - 1),
                g.y_f + (g.y_l - g.y_f) * i / (SWIPE_REPORTS - 1),
            )
            for i in range(SWIPE_REPORTS)
        ]
        quantized = []
        for x, y in pts:
            xi, yi = round(x), round(y)
            if not (0 <= xi < w and 0 <= yi < h):
                raise OutOfBounds(x, y, bounds)
            quantized.append((xi, yi))
        lines.append(_fmt(t, EventCode.TRACKING_ID.value, track_id))
        n = len(quantized)
        for i, (xi, yi) in enumerate(quantized):
            ts_i = t + (g.dur * i / (n - 1) if n > 1 else 0.0)
            lines.append(_fmt(ts_i, EventCode.POSITION_X.value, xi))
            lines.append(_fmt(ts_i, EventCode.POSITION_Y.value, yi))
            lines.append(_fmt(ts_i, EventCode.SYN_REPORT.value, 0))
        t += g.dur
        lines.append(_fmt(t, EventCode.TRACKING_ID.value, TRACKING_CLOSE))
        lines.append(_fmt(t, EventCode.SYN_REPORT.value, 0))
        t += gap
    return "\n".join(lines) + "\n"
