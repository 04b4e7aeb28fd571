import pytest

from sensing_time.ingestion import Detection, GazeSample, TelemetrySample, TrialManifest, align, frame_time


def build_trial(
    n_frames=20,
    gaze=None,
    boxes=None,
    fps=50.0,
    label="person",
    conf=0.9,
    speed=30.0,
    dist=50.0,
    trial_id="t",
    group="fit",
    max_gap_ms=100,
):
    """Small aligned trial from per-frame gaze points and target boxes.

    ``gaze`` maps frame -> (x, y) or None (invalid); missing frames get a
    fixed off-target point. ``boxes`` maps frame -> list of boxes.
    """
    gaze = gaze or {}
    boxes = boxes or {}
    m = TrialManifest(trial_id, trial_id, group, fps=fps)
    g, d, tl = [], [], []
    for f in range(n_frames):
        t = frame_time(f, fps)
        pt = gaze.get(f, (10.0 + f * 1e-3, 10.0))
        g.append(GazeSample(t, 0.0, 0.0, False) if pt is None else GazeSample(t, float(pt[0]), float(pt[1]), True))
        for b in boxes.get(f, []):
            d.append(Detection(f, t, label, conf, tuple(float(v) for v in b)))
        tl.append(TelemetrySample(t, speed, dist))
    # a non-target detection keeps the stream non-empty
    d.append(Detection(0, 0, "bus", 0.9, (600.0, 200.0, 900.0, 380.0)))
    return align(m, g, d, tl, max_gap_ms=max_gap_ms, n_frames=n_frames)


@pytest.fixture
def trial_factory():
    return build_trial


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance verdict lines even when output is captured."""
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "VERDICTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
