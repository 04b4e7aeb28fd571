import io
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sensing_time.ingestion import (
    BBoxOutOfFrame,
    DegenerateBBox,
    Detection,
    EmptyStream,
    GazeSample,
    MalformedManifest,
    MalformedRecord,
    MalformedRow,
    NonMonotonicTime,
    TelemetryGapWarning,
    TelemetrySample,
    TrialManifest,
    align,
    format_detections,
    format_gaze,
    format_manifest,
    format_telemetry,
    frame_time,
    parse_detections,
    parse_gaze,
    parse_manifest,
    parse_telemetry,
)


def test_gaze_line_parses_to_frame_center():
    (s,) = parse_gaze(io.StringIO("t_ms,x_px,y_px,valid\n100,480.0,270.0,1\n"))
    assert s == GazeSample(100, 480.0, 270.0, True)


def test_empty_gaze_file_is_empty_sequence():
    assert parse_gaze(io.StringIO("")) == []


def test_gaze_time_going_backwards_rejected():
    with pytest.raises(NonMonotonicTime) as err:
        parse_gaze(io.StringIO("t_ms,x_px,y_px,valid\n40,1,1,1\n20,1,1,1\n"))
    assert err.value.line == 3


@pytest.mark.parametrize(
    "body",
    ["40,1,1\n", "40,a,1,1\n", "40,1,1,2\n", "-5,1,1,1\n"],
)
def test_malformed_gaze_rows_report_line(body):
    with pytest.raises(MalformedRow) as err:
        parse_gaze(io.StringIO("t_ms,x_px,y_px,valid\n0,1,1,1\n" + body))
    assert err.value.line == 3


def test_gaze_header_checked():
    with pytest.raises(MalformedRow):
        parse_gaze(io.StringIO("t,x,y,v\n0,1,1,1\n"))


def test_bom_header_accepted():
    assert len(parse_gaze(io.StringIO("\ufefft_ms,x_px,y_px,valid\n0,1,1,1\n"))) == 1


def test_telemetry_parse_and_domain():
    (s,) = parse_telemetry(io.StringIO("t_ms,speed_kmh,dist_m\n0,50.0,100.0\n"))
    assert s == TelemetrySample(0, 50.0, 100.0)
    with pytest.raises(MalformedRow):
        parse_telemetry(io.StringIO("t_ms,speed_kmh,dist_m\n0,-1.0,100.0\n"))
    with pytest.raises(MalformedRow):
        parse_telemetry(io.StringIO("t_ms,speed_kmh,dist_m\n0,1.0,-100.0\n"))


def test_telemetry_gap_is_a_warning_not_an_error():
    with pytest.warns(TelemetryGapWarning):
        out = parse_telemetry(io.StringIO("t_ms,speed_kmh,dist_m\n0,5,5\n1500,5,4\n"))
    assert len(out) == 2


def _det(**over):
    rec = {"frame": 50, "t_ms": 1000, "label": "person", "conf": 0.9,
           "x_min": 10, "y_min": 10, "x_max": 50, "y_max": 90}
    rec.update(over)
    import json
    return io.StringIO(json.dumps(rec) + "\n")


def test_inverted_box_is_degenerate():
    with pytest.raises(DegenerateBBox):
        parse_detections(_det(x_min=10, y_min=10, x_max=5, y_max=20))


def test_confidence_out_of_range():
    with pytest.raises(MalformedRecord):
        parse_detections(_det(conf=1.2))


def test_box_outside_frame():
    with pytest.raises(BBoxOutOfFrame):
        parse_detections(_det(x_max=970), width=960, height=540)


def test_time_must_match_frame_index():
    with pytest.raises(MalformedRecord):
        parse_detections(_det(t_ms=1010), fps=50)


def test_bad_json_reports_line():
    with pytest.raises(MalformedRecord) as err:
        parse_detections(io.StringIO('{"frame": 0}\nnot json\n'))
    assert err.value.line == 1


def test_two_children_share_frame():
    text = _det().getvalue() + _det(x_min=60, x_max=90).getvalue()
    dets = parse_detections(io.StringIO(text), 960, 540, 50)
    assert [d.frame_idx for d in dets] == [50, 50]


def test_round_trips_are_byte_identical():
    gaze = [GazeSample(0, 1.5, 2.25, True), GazeSample(20, 0.0, 0.0, False), GazeSample(40, 480.0, 270.0, True)]
    text = format_gaze(gaze)
    assert format_gaze(parse_gaze(io.StringIO(text))) == text
    tele = [TelemetrySample(0, 40.0, 60.0), TelemetrySample(20, 39.5, 59.78)]
    text = format_telemetry(tele)
    assert format_telemetry(parse_telemetry(io.StringIO(text))) == text
    dets = [Detection(0, 0, "person", 0.9, (1.0, 2.0, 3.0, 4.0)), Detection(1, 20, "bus", 0.5, (5.0, 6.0, 7.5, 8.0))]
    text = format_detections(dets)
    assert format_detections(parse_detections(io.StringIO(text), 960, 540, 50)) == text


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 960, allow_nan=False), st.floats(0, 540, allow_nan=False), st.booleans()),
                min_size=1, max_size=30))
def test_gaze_round_trip_property(points):
    samples = [GazeSample(20 * i, x, y, v) for i, (x, y, v) in enumerate(points)]
    text = format_gaze(samples)
    assert parse_gaze(io.StringIO(text)) == samples
    assert format_gaze(parse_gaze(io.StringIO(text))) == text


def test_manifest_round_trip(tmp_path):
    m = TrialManifest("a1", "s1", "cond_fit", fps=25.0, width=640, height=480,
                      target_labels=frozenset({"person", "child"}),
                      gaze_path=tmp_path / "g.csv", detections_path=tmp_path / "d.jsonl",
                      telemetry_path=tmp_path / "t.csv", crash_flag=True)
    p = tmp_path / "m.txt"
    p.write_text(format_manifest(m, base=tmp_path))
    assert parse_manifest(p) == m


def test_manifest_errors(tmp_path):
    p = tmp_path / "m.txt"
    p.write_text("trial_id = x\ngroup = sporty\n")
    with pytest.raises(MalformedManifest):
        parse_manifest(p)
    p.write_text("group = fit\n")
    with pytest.raises(MalformedManifest):
        parse_manifest(p)
    p.write_text("trial_id x\n")
    with pytest.raises(MalformedManifest) as err:
        parse_manifest(p)
    assert err.value.line == 1


def _manifest():
    return TrialManifest("t", "s", "fit")


def _tele(n):
    return [TelemetrySample(frame_time(i, 50), 30.0, 50.0) for i in range(n)]


def _dets():
    return [Detection(0, 0, "bus", 0.9, (1.0, 1.0, 2.0, 2.0))]


def test_identity_slotting_on_equal_grids():
    gaze = [GazeSample(20 * i, float(i), float(i), True) for i in range(10)]
    tr = align(_manifest(), gaze, _dets(), _tele(10))
    assert tr.n_frames == 10
    assert np.array_equal(tr.gaze_x, np.arange(10.0))
    assert tr.gaze_valid.all() and not tr.gaze_held.any()


def test_offset_samples_snap_to_nearest_slot_and_tie_goes_earlier():
    # samples 10 ms off grid are exactly half a period away from two slots
    gaze = [GazeSample(0, 0.0, 0.0, True), GazeSample(30, 1.0, 1.0, True), GazeSample(60, 2.0, 2.0, True)]
    tr = align(_manifest(), gaze, _dets(), _tele(4), n_frames=4)
    # slot 20 ms: 0 (20 away) vs 30 (10 away) -> 30; slot 40 ms: 30 and 60 -> tie 10/20 -> 30
    assert list(tr.gaze_x) == [0.0, 1.0, 1.0, 2.0]


def test_short_gap_is_held_forward():
    gaze = [GazeSample(20 * i, float(i), 0.0, i not in (3, 4, 5)) for i in range(10)]
    tr = align(_manifest(), gaze, _dets(), _tele(10))
    assert tr.gaze_valid.all()
    assert list(tr.gaze_held) == [i in (3, 4, 5) for i in range(10)]
    assert list(tr.gaze_x[3:6]) == [2.0, 2.0, 2.0]


def test_long_gap_stays_invalid():
    gaze = [GazeSample(20 * i, float(i), 0.0, not 3 <= i < 13) for i in range(20)]
    tr = align(_manifest(), gaze, _dets(), _tele(20))
    assert not tr.gaze_valid[3:13].any()
    assert tr.gaze_valid[:3].all() and tr.gaze_valid[13:].all()


def test_gap_boundary_at_exactly_max_gap():
    # five missing frames = 100 ms is held; six = 120 ms is not
    for missing, expect in ((5, True), (6, False)):
        gaze = [GazeSample(20 * i, 1.0, 0.0, not 2 <= i < 2 + missing) for i in range(15)]
        tr = align(_manifest(), gaze, _dets(), _tele(15))
        assert bool(tr.gaze_valid[2:2 + missing].all()) is expect


def test_empty_streams_raise():
    gaze = [GazeSample(0, 1.0, 1.0, True)]
    with pytest.raises(EmptyStream):
        align(_manifest(), [], _dets(), _tele(1))
    with pytest.raises(EmptyStream):
        align(_manifest(), gaze, [], _tele(1))
    with pytest.raises(EmptyStream):
        align(_manifest(), gaze, _dets(), [])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 400), min_size=1, max_size=40, unique=True), st.randoms(use_true_random=False))
def test_slot_time_tolerance_and_permutation_invariance(times, rnd):
    times = sorted(times)
    gaze = [GazeSample(t, float(t), 0.0, True) for t in times]
    dets = [Detection(f, frame_time(f, 50), "person", 0.5 + 0.01 * j, (1.0 + j, 1.0, 5.0 + j, 5.0))
            for f in range(0, 10, 3) for j in range(3)]
    tr = align(_manifest(), gaze, dets, _tele(21), n_frames=21)
    own = tr.gaze_valid & ~tr.gaze_held
    # the x coordinate records the sample time, so check the slot distance
    assert np.all(np.abs(tr.gaze_x[own] - tr.frame_times[own]) <= 10)
    shuffled = list(dets)
    rnd.shuffle(shuffled)
    tr2 = align(_manifest(), gaze, shuffled, _tele(21), n_frames=21)
    assert tr2.detections == tr.detections
