from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from playtest import trace
from helpers import brute_classify
from playtest.trace import (
    Action,
    EventCode,
    Gesture,
    GestureKind,
    MalformedLine,
    OutOfBounds,
    classify_segment,
    emit_trace,
    parse_gestures,
    parse_trace,
    segment_gestures,
)

SAMPLE = """\
add device 1: /dev/input/event2
  name:     "synaptics_touchpad"
[ 377065.721234] /dev/input/event2: EV_ABS ABS_MT_TRACKING_ID 000009ae
[ 377065.721234] /dev/input/event2: EV_ABS ABS_MT_POSITION_X 000002ba
[ 377065.721234] /dev/input/event2: EV_ABS ABS_MT_POSITION_Y 00000159
[ 377065.721234] /dev/input/event2: EV_SYN SYN_REPORT 00000000
[ 377065.779086] /dev/input/event2: EV_ABS ABS_MT_POSITION_X 000002c0
[ 377065.779086] /dev/input/event2: EV_ABS ABS_MT_POSITION_Y 00000170
[ 377065.779086] /dev/input/event2: EV_SYN SYN_REPORT 00000000
[ 377065.931004] /dev/input/event2: EV_ABS ABS_MT_TRACKING_ID ffffffff
[ 377065.931004] /dev/input/event2: EV_SYN SYN_REPORT 00000000
"""


class TestParse:
    def test_sample_events(self):
        events = parse_trace(SAMPLE)
        typed = [e for e in events if e.code is not EventCode.OTHER]
        assert len(typed) == 9
        assert typed[0].code is EventCode.TRACKING_ID
        assert typed[0].value == 0x9AE
        assert typed[1].value == 0x2BA
        assert typed[2].value == 0x159
        assert typed[0].ts == pytest.approx(377065.721234, abs=1e-9)

    def test_headers_kept_as_other(self):
        events = parse_trace(SAMPLE)
        assert events[0].code is EventCode.OTHER
        assert "add device" in events[0].raw

    def test_malformed_line_number(self):
        bad = "[ 1.000000] /dev/input/event2: EV_ABS ABS_MT_POSITION_X\n"
        with pytest.raises(MalformedLine) as exc:
            parse_trace(bad)
        assert exc.value.line_no == 1

    def test_value_too_wide(self):
        bad = "[ 1.000000] /dev/input/event2: EV_ABS ABS_MT_POSITION_X 100000000\n"
        with pytest.raises(MalformedLine):
            parse_trace(bad)

    def test_empty_text(self):
        assert parse_trace("") == []
        assert segment_gestures([]) == []


class TestSegment:
    def test_sample_is_one_swipe(self):
        gestures = parse_gestures(SAMPLE)
        assert len(gestures) == 1
        g = gestures[0]
        assert g.kind is GestureKind.SWIPE
        assert (g.x_f, g.y_f) == (0x2BA, 0x159)
        assert (g.x_l, g.y_l) == (0x2C0, 0x170)
        assert g.dur == pytest.approx(377065.931004 - 377065.721234, abs=1e-6)

    def test_dangling_segment_flagged(self, caplog):
        text = "\n".join(l for l in SAMPLE.splitlines() if "377065.931004" not in l)
        with caplog.at_level("WARNING", logger="playtest.trace"):
            segs = segment_gestures(parse_trace(text))
        assert len(segs) == 1
        assert segs[0].dangling
        assert any("open segment" in r.message for r in caplog.records)

    def test_segment_without_coordinates_dropped(self, caplog):
        text = (
            "[ 1.000000] /dev/input/event2: EV_ABS ABS_MT_TRACKING_ID 00000001\n"
            "[ 1.000000] /dev/input/event2: EV_SYN SYN_REPORT 00000000\n"
            "[ 1.100000] /dev/input/event2: EV_ABS ABS_MT_TRACKING_ID ffffffff\n"
        )
        with caplog.at_level("WARNING", logger="playtest.trace"):
            segs = segment_gestures(parse_trace(text))
        assert segs == []
        assert any("no coordinates" in r.message for r in caplog.records)

    def test_bare_zero_closes_open_segment(self):
        text = (
            "[ 1.000000] /dev/input/event2: EV_ABS ABS_MT_TRACKING_ID 00000007\n"
            "[ 1.000000] /dev/input/event2: EV_ABS ABS_MT_POSITION_X 00000010\n"
            "[ 1.000000] /dev/input/event2: EV_ABS ABS_MT_POSITION_Y 00000010\n"
            "[ 1.000000] /dev/input/event2: EV_SYN SYN_REPORT 00000000\n"
            "[ 1.050000] /dev/input/event2: EV_ABS ABS_MT_TRACKING_ID 00000000\n"
        )
        segs = segment_gestures(parse_trace(text))
        assert len(segs) == 1
        assert not segs[0].dangling
        assert segs[0].ts_l == pytest.approx(1.05)

    def test_latest_x_pairs_with_latest_y(self):
        # X-only report reuses the previous Y.
        text = (
            "[ 1.000000] /dev/input/event2: EV_ABS ABS_MT_TRACKING_ID 00000001\n"
            "[ 1.000000] /dev/input/event2: EV_ABS ABS_MT_POSITION_X 00000014\n"
            "[ 1.000000] /dev/input/event2: EV_ABS ABS_MT_POSITION_Y 00000028\n"
            "[ 1.000000] /dev/input/event2: EV_SYN SYN_REPORT 00000000\n"
            "[ 1.200000] /dev/input/event2: EV_ABS ABS_MT_POSITION_X 00000064\n"
            "[ 1.200000] /dev/input/event2: EV_SYN SYN_REPORT 00000000\n"
            "[ 1.300000] /dev/input/event2: EV_ABS ABS_MT_TRACKING_ID ffffffff\n"
        )
        segs = segment_gestures(parse_trace(text))
        assert (segs[0].x_l, segs[0].y_l) == (0x64, 0x28)


class TestClassify:
    @pytest.mark.parametrize(
        "dx,dy,dur,kind",
        [
            (0, 0, 0.05, GestureKind.TAP),
            (3, 4, 0.10, GestureKind.TAP),
            (0, 19, 0.19, GestureKind.TAP),
            (20, 0, 0.30, GestureKind.SWIPE),
            (12, 16, 0.25, GestureKind.SWIPE),   # 3-4-5 triangle, dist exactly 20
            (100, -50, 0.5, GestureKind.SWIPE),
            (19, 0, 0.5, GestureKind.TAP),       # long but short-range: distance rules
            (25, 0, 0.05, GestureKind.SWIPE),    # fast but long-range: distance rules
        ],
    )
    def test_threshold_table(self, dx, dy, dur, kind):
        g = _gesture_from(100, 300, 100 + dx, 300 + dy, dur)
        assert g.kind is kind
        assert g.kind is brute_classify(100, 300, 100 + dx, 300 + dy, dur)

    def test_sinx_sign(self):
        up = _gesture_from(100, 500, 100, 400, 0.3)
        down = _gesture_from(100, 400, 100, 500, 0.3)
        assert up.sinx == pytest.approx(-1.0)
        assert down.sinx == pytest.approx(1.0)

    def test_tap_has_no_sinx(self):
        g = _gesture_from(10, 10, 12, 12, 0.05)
        assert g.sinx is None
        assert g.dist == pytest.approx(math.hypot(2, 2))


def _gesture_from(x0, y0, x1, y1, dur):
    action = (
        Action([Gesture.tap(x0, y0, dur)])
        if (x0, y0) == (x1, y1)
        else Action([Gesture.swipe(x0, y0, x1, y1, dur)])
    )
    text = emit_trace(action, base_ts=5.0)
    segs = segment_gestures(parse_trace(text))
    assert len(segs) == 1
    return classify_segment(segs[0])


coords_x = st.integers(min_value=0, max_value=479)
coords_y = st.integers(min_value=0, max_value=799)
durations = st.floats(min_value=0.0, max_value=2.0, allow_nan=False).map(
    lambda d: round(d, 3)
)


@st.composite
def gestures(draw) -> Gesture:
    x0, y0 = draw(coords_x), draw(coords_y)
    if draw(st.booleans()):
        return Gesture.tap(x0, y0, draw(durations))
    x1, y1 = draw(coords_x), draw(coords_y)
    return Gesture.swipe(x0, y0, x1, y1, draw(durations))


class TestRoundTrip:
    @given(st.lists(gestures(), min_size=1, max_size=4), st.floats(0, 1e5))
    @settings(max_examples=300, deadline=None)
    def test_emit_parse_recovers_gestures(self, gs, base):
        text = emit_trace(Action(gs), base_ts=round(base, 6))
        out = parse_gestures(text)
        assert len(out) == len(gs)
        for orig, got in zip(gs, out):
            expected_kind = brute_classify(
                round(orig.x_f), round(orig.y_f), round(orig.x_l), round(orig.y_l), orig.dur
            )
            assert got.kind is expected_kind
            assert abs(got.x_f - orig.x_f) <= 1.0
            assert abs(got.y_f - orig.y_f) <= 1.0
            assert abs(got.x_l - orig.x_l) <= 1.0
            assert abs(got.y_l - orig.y_l) <= 1.0
            assert abs(got.dur - orig.dur) <= 1e-3

    @given(st.lists(gestures(), min_size=1, max_size=4))
    @settings(max_examples=100, deadline=None)
    def test_segment_count_matches_close_markers(self, gs):
        text = emit_trace(Action(gs))
        events = parse_trace(text)
        closes = sum(
            1
            for e in events
            if e.code is EventCode.TRACKING_ID and e.value == trace.TRACKING_CLOSE
        )
        assert len(segment_gestures(events)) == closes == len(gs)

    @given(st.lists(gestures(), min_size=1, max_size=3))
    @settings(max_examples=100, deadline=None)
    def test_timestamps_non_decreasing(self, gs):
        events = parse_trace(emit_trace(Action(gs), base_ts=1.0))
        ts = [e.ts for e in events if e.code is not EventCode.OTHER]
        assert all(a <= b for a, b in zip(ts, ts[1:]))


class TestFuzz:
    @given(st.text(max_size=400))
    @settings(max_examples=300, deadline=None)
    def test_parser_total_on_arbitrary_text(self, text):
        # Any input either parses to events or raises MalformedLine; nothing else.
        try:
            events = parse_trace(text)
        except MalformedLine:
            return
        segment_gestures(events)

    @given(st.binary(max_size=200))
    @settings(max_examples=200, deadline=None)
    def test_parser_total_on_decoded_bytes(self, blob):
        try:
            events = parse_trace(blob.decode("utf-8", errors="replace"))
        except MalformedLine:
            return
        segment_gestures(events)


class TestEmit:
    def test_empty_action_rejected(self):
        with pytest.raises(ValueError):
            emit_trace(Action([]))

    def test_out_of_bounds_rejected(self):
        with pytest.raises(OutOfBounds):
            emit_trace(Action([Gesture.tap(480, 10, 0.05)]))
        with pytest.raises(OutOfBounds):
            emit_trace(Action([Gesture.swipe(10, 10, 10, 800, 0.3)]))

    def test_swipe_report_count(self):
        text = emit_trace(Action([Gesture.swipe(10, 10, 200, 300, 0.4)]))
        xs = [l for l in text.splitlines() if "POSITION_X" in l]
        assert len(xs) == trace.SWIPE_REPORTS
        assert trace.SWIPE_REPORTS >= 10

    def test_tracking_ids_monotonic(self):
        gs = [Gesture.tap(10, 10, 0.05), Gesture.tap(20, 20, 0.05)]
        events = parse_trace(emit_trace(Action(gs)))
        ids = [
            e.value
            for e in events
            if e.code is EventCode.TRACKING_ID and e.value != trace.TRACKING_CLOSE
        ]
        assert ids == sorted(ids) and len(set(ids)) == len(ids)

    def test_zero_duration_tap_roundtrips(self):
        got = parse_gestures(emit_trace(Action([Gesture.tap(5, 5, 0.0)])))
        assert got[0].kind is GestureKind.TAP
        assert got[0].dur == 0.0

    def test_microsecond_formatting(self):
        text = emit_trace(Action([Gesture.tap(5, 5, 0.05)]), base_ts=0.1)
        first = text.splitlines()[0]
        assert first.startswith("[ 0.100000] /dev/input/event2: EV_ABS ABS_MT_TRACKING_ID ")
