"""Seeded synthetic hazard trials with known ground-truth events.

Randomness comes from numpy's PCG64 generator seeded explicitly from each
spec; nothing reads system entropy, so a seed fully determines the output
bytes for a given numpy version.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from .ingestion import (
    GROUPS,
    Detection,
    GazeSample,
    SyncedTrial,
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
    parse_telemetry,
)
from .metrics import initial_gaze_distance, roi_center, union_box


class InvalidSpec(ValueError):
    pass


@dataclass(frozen=True)
class ChildPath:
    """A pedestrian box that appears at hazard onset and moves linearly."""

    x: float = 620.0
    y: float = 290.0
    w: float = 34.0
    h: float = 70.0
    vx: float = -4.0
    vy: float = 0.0

    def box_at(self, k: int) -> tuple[float, float, float, float]:
        x0 = self.x + self.vx * k
        y0 = self.y + self.vy * k
        return (x0, y0, x0 + self.w, y0 + self.h)


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int = 0
    trial_id: str = "trial_000"
    subject_id: str = ""
    group: str = "fit"
    fps: float = 50.0
    width: int = 960
    height: int = 540
    duration_frames: int = 120
    hazard_onset_frame: int = 50
    gaze_delay_frames: int = 8
    children: tuple[ChildPath, ...] = (ChildPath(), ChildPath(x=640.0, y=300.0, w=30.0, h=62.0))
    fixation: tuple[float, float] = (420.0, 260.0)
    saccade_offset: tuple[float, float] = (0.0, 0.0)
    jitter_sd_px: float = 0.0
    gaze_dropout_prob: float = 0.0
    dropout_windows: tuple[tuple[int, int], ...] = ()
    detection_flicker_prob: float = 0.0
    detection_miss_prob: float = 0.0
    conf: float = 0.9
    distractor: tuple[float, float, float, float] | None = (640.0, 200.0, 900.0, 380.0)
    initial_speed_kmh: float = 40.0
    deceleration_ms2: float = 4.0
    initial_distance_m: float = 60.0
    crash_flag: bool = False

    @property
    def period_ms(self) -> float:
        return 1000.0 / self.fps

    @property
    def hit_frame(self) -> int:
        return self.hazard_onset_frame + self.gaze_delay_frames


@dataclass(frozen=True)
class GroundTruth:
    trial_id: str
    t1_ms: int
    t2_ms: int
    st_ms: int
    igd_px: int
    ttc_s: float | None
    speed_kmh: float


@dataclass(frozen=True)
class GeneratedTrial:
    manifest: TrialManifest
    gaze_text: str
    detections_text: str
    telemetry_text: str
    truth: GroundTruth
    n_frames: int = field(default=0)

    def load(self, max_gap_ms: float = 100) -> SyncedTrial:
        """Parse the generated stream texts and align them, as from disk."""
        m = self.manifest
        gaze = parse_gaze(io.StringIO(self.gaze_text))
        dets = parse_detections(io.StringIO(self.detections_text), m.width, m.height, m.fps)
        tele = parse_telemetry(io.StringIO(self.telemetry_text))
        return align(m, gaze, dets, tele, max_gap_ms=max_gap_ms)

    def write(self, directory: str | Path) -> Path:
        """Write the three streams and a manifest; returns the manifest path."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        names = {"gaze": "gaze.csv", "detections": "detections.jsonl", "telemetry": "telemetry.csv"}
        (d / names["gaze"]).write_text(self.gaze_text, encoding="utf-8")
        (d / names["detections"]).write_text(self.detections_text, encoding="utf-8")
        (d / names["telemetry"]).write_text(self.telemetry_text, encoding="utf-8")
        m = replace(
            self.manifest,
            gaze_path=d / names["gaze"],
            detections_path=d / names["detections"],
            telemetry_path=d / names["telemetry"],
        )
        path = d / "manifest.txt"
        path.write_text(format_manifest(m, base=d), encoding="utf-8")
        return path


def _q(v: float, digits: int = 2) -> float:
    return round(float(v), digits)


def _clip_box(box, width, height):
    x0, y0, x1, y1 = box
    x0, x1 = max(x0, 0.0), min(x1, float(width))
    y0, y1 = max(y0, 0.0), min(y1, float(height))
    if x1 - x0 < 1.0 or y1 - y0 < 1.0:
        return None
    return (_q(x0), _q(y0), _q(x1), _q(y1))


def _inside(pt, box) -> bool:
    return box[0] <= pt[0] <= box[2] and box[1] <= pt[1] <= box[3]


def child_boxes(spec: ScenarioSpec, frame: int) -> list[tuple[float, float, float, float]]:
    """Quantised, frame-clipped boxes of the visible children at ``frame``."""
    if frame < spec.hazard_onset_frame:
        return []
    k = frame - spec.hazard_onset_frame
    out = []
    for child in spec.children:
        box = _clip_box(child.box_at(k), spec.width, spec.height)
        if box is not None:
            out.append(box)
    return out


def validate(spec: ScenarioSpec) -> None:
    if spec.group not in GROUPS:
        raise InvalidSpec(f"unknown group {spec.group!r}")
    if spec.fps <= 0 or spec.width <= 0 or spec.height <= 0:
        raise InvalidSpec("fps and frame size must be positive")
    if spec.hazard_onset_frame < 2 or spec.gaze_delay_frames < 0:
        raise InvalidSpec("onset must be at frame 2 or later and the delay non-negative")
    if spec.hit_frame + 2 >= spec.duration_frames:
        raise InvalidSpec("hazard onset plus gaze delay must end before the scenario")
    for name in ("gaze_dropout_prob", "detection_flicker_prob", "detection_miss_prob"):
        if not 0.0 <= getattr(spec, name) <= 1.0:
            raise InvalidSpec(f"{name} must lie in [0, 1]")
    if not 1 <= len(spec.children) <= 2:
        raise InvalidSpec("one or two children are supported")
    if not 0.25 <= spec.conf <= 1.0:
        raise InvalidSpec("detection confidence must lie in [0.25, 1]")
    if spec.jitter_sd_px < 0:
        raise InvalidSpec("jitter must be non-negative")
    if not (0 <= spec.fixation[0] <= spec.width and 0 <= spec.fixation[1] <= spec.height):
        raise InvalidSpec("fixation point lies outside the frame")
    for f in range(spec.hazard_onset_frame, spec.hit_frame + 2):
        boxes = child_boxes(spec, f)
        if not boxes:
            raise InvalidSpec(f"no child visible at frame {f}")
        if f < spec.hit_frame and any(_inside(spec.fixation, b) for b in boxes):
            raise InvalidSpec(f"pre-hazard fixation already on a child at frame {f}")
    target = _gaze_target(spec, spec.hit_frame)
    if not any(_inside(target, b) for b in child_boxes(spec, spec.hit_frame)):
        raise InvalidSpec("saccade target falls outside the children boxes")


def _gaze_target(spec: ScenarioSpec, frame: int, boxes=None) -> tuple[float, float]:
    if boxes is None:
        boxes = child_boxes(spec, frame)
    if not boxes:
        return spec.fixation
    cx, cy = roi_center(union_box(boxes))
    return (cx + spec.saccade_offset[0], cy + spec.saccade_offset[1])


def _speed_profile(spec: ScenarioSpec, times_ms: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Constant speed until 500 ms after the gaze hit, then constant braking."""
    brake_start = frame_time(spec.hit_frame, spec.fps) + 500
    t = times_ms / 1000.0
    tb = brake_start / 1000.0
    v0 = spec.initial_speed_kmh / 3.6
    a = spec.deceleration_ms2
    v = np.where(t <= tb, v0, np.maximum(v0 - a * (t - tb), 0.0))
    # distance travelled, integrated piecewise exactly
    stop = tb + (v0 / a if a > 0 else math.inf)
    te = np.minimum(t, stop)
    travelled = np.where(
        t <= tb, v0 * t, v0 * tb + v0 * (te - tb) - 0.5 * a * (te - tb) ** 2
    )
    dist = np.maximum(spec.initial_distance_m - travelled, 0.0)
    return v * 3.6, dist


def generate_trial(spec: ScenarioSpec) -> GeneratedTrial:
    """Render one scenario into gaze, detection and telemetry streams.

    With every noise knob at zero the event detector recovers the returned
    ground truth exactly.
    """
    validate(spec)
    rng = np.random.default_rng(spec.seed)
    n = spec.duration_frames
    times = np.array([frame_time(i, spec.fps) for i in range(n)], dtype=np.int64)

    kids = [child_boxes(spec, f) for f in range(n)]
    conf = _q(spec.conf)
    bus = tuple(map(_q, spec.distractor)) if spec.distractor is not None else None
    detections: list[Detection] = []
    flickered = np.zeros(n, dtype=bool)
    for f in range(n):
        t = int(times[f])
        if bus is not None:
            detections.append(Detection(f, t, "bus", conf, bus))
        for box in kids[f]:
            if spec.detection_miss_prob > 0 and rng.random() < spec.detection_miss_prob:
                continue
            detections.append(Detection(f, t, "person", conf, box))
        # isolated single-frame false positives strictly before the frame preceding onset
        if (
            spec.detection_flicker_prob > 0
            and f < spec.hazard_onset_frame - 1
            and not (f > 0 and flickered[f - 1])
            and rng.random() < spec.detection_flicker_prob
        ):
            fx = rng.uniform(0, spec.width - 40)
            fy = rng.uniform(0, spec.height - 80)
            detections.append(Detection(f, t, "person", conf, (_q(fx), _q(fy), _q(fx + 40), _q(fy + 80))))
            flickered[f] = True

    dropped = np.zeros(n, dtype=bool)
    for start, length in spec.dropout_windows:
        dropped[max(start, 0):start + length] = True
    if spec.gaze_dropout_prob > 0:
        dropped |= rng.random(n) < spec.gaze_dropout_prob

    gaze: list[GazeSample] = []
    for f in range(n):
        if dropped[f]:
            gaze.append(GazeSample(int(times[f]), 0.0, 0.0, False))
            continue
        x, y = spec.fixation if f < spec.hit_frame else _gaze_target(spec, f, kids[f])
        if spec.jitter_sd_px > 0:
            x += rng.normal(0.0, spec.jitter_sd_px)
            y += rng.normal(0.0, spec.jitter_sd_px)
        x = min(max(x, 0.0), float(spec.width))
        y = min(max(y, 0.0), float(spec.height))
        gaze.append(GazeSample(int(times[f]), _q(x), _q(y), True))

    speed, dist = _speed_profile(spec, times.astype(float))
    telemetry = [
        TelemetrySample(int(times[f]), _q(speed[f], 3), _q(dist[f], 3)) for f in range(n)
    ]

    onset = spec.hazard_onset_frame
    t1, t2 = int(times[onset]), int(times[spec.hit_frame])
    g0 = gaze[onset]
    onset_boxes = kids[onset]
    igd = initial_gaze_distance((g0.x_px, g0.y_px), roi_center(union_box(onset_boxes)))
    v_on, d_on = telemetry[onset].speed_kmh, telemetry[onset].dist_m
    ttc = d_on / (v_on / 3.6) if v_on > 0.1 else None
    truth = GroundTruth(spec.trial_id, t1, t2, t2 - t1, igd, ttc, v_on)

    manifest = TrialManifest(
        trial_id=spec.trial_id,
        subject_id=spec.subject_id or spec.trial_id,
        group=spec.group,
        fps=spec.fps,
        width=spec.width,
        height=spec.height,
        crash_flag=spec.crash_flag,
    )
    return GeneratedTrial(
        manifest=manifest,
        gaze_text=format_gaze(gaze),
        detections_text=format_detections(detections),
        telemetry_text=format_telemetry(telemetry),
        truth=truth,
        n_frames=n,
    )


def random_spec(
    rng: np.random.Generator,
    trial_id: str = "trial_000",
    group: str = "fit",
    delay_frames: int | None = None,
    speed_range: tuple[float, float] = (3.3, 46.9),
    distance_range: tuple[float, float] = (8.0, 90.0),
    fps: float = 50.0,
    **noise,
) -> ScenarioSpec:
    """Draw a valid scenario geometry; redraws until the spec validates."""
    for _ in range(1000):
        delay = int(rng.integers(1, 26)) if delay_frames is None else int(delay_frames)
        onset = int(rng.integers(20, 60))
        n_children = int(rng.integers(1, 3))
        vx = float(rng.uniform(-7.0, -2.0))
        x = float(rng.uniform(560.0, 700.0))
        y = float(rng.uniform(250.0, 330.0))
        kids = [ChildPath(_q(x), _q(y), _q(rng.uniform(24, 44)), _q(rng.uniform(55, 90)), _q(vx), 0.0)]
        if n_children == 2:
            kids.append(
                ChildPath(_q(x + rng.uniform(10, 30)), _q(y + rng.uniform(-15, 15)),
                          _q(rng.uniform(22, 40)), _q(rng.uniform(50, 85)), _q(vx), 0.0)
            )
        speed = _q(rng.uniform(*speed_range))
        # the distance range applies at hazard onset; back it out to frame 0
        travelled = speed / 3.6 * frame_time(onset, fps) / 1000.0
        spec = ScenarioSpec(
            seed=int(rng.integers(0, 2**31 - 1)),
            trial_id=trial_id,
            group=group,
            fps=fps,
            duration_frames=onset + delay + int(rng.integers(10, 40)),
            hazard_onset_frame=onset,
            gaze_delay_frames=delay,
            children=tuple(kids),
            fixation=(_q(rng.uniform(150, 520)), _q(rng.uniform(150, 420))),
            saccade_offset=(_q(rng.uniform(-5, 5)), _q(rng.uniform(-10, 10))),
            initial_speed_kmh=speed,
            deceleration_ms2=_q(rng.uniform(2.0, 7.0)),
            initial_distance_m=_q(rng.uniform(*distance_range) + travelled),
            **noise,
        )
        try:
            validate(spec)
        except InvalidSpec:
            continue
        return spec
    raise InvalidSpec("could not draw a valid scenario")


REFERENCE_MEAN_MS = {"fit": 163.0, "cond_fit": 293.0, "unfit": 262.0}
REFERENCE_SD_MS = {"fit": 47.0, "cond_fit": 95.0, "unfit": 99.0}
REFERENCE_N = {"fit": 20, "cond_fit": 17, "unfit": 19}


@dataclass(frozen=True)
class CohortSpec:
    seed: int = 0
    n_per_group: Mapping[str, int] = field(default_factory=lambda: dict(REFERENCE_N))
    st_mean_ms: Mapping[str, float] = field(default_factory=lambda: dict(REFERENCE_MEAN_MS))
    st_sd_ms: Mapping[str, float] = field(default_factory=lambda: dict(REFERENCE_SD_MS))
    speed_range_kmh: tuple[float, float] = (3.3, 46.9)
    distance_range_m: tuple[float, float] = (8.0, 90.0)
    fps: float = 50.0
    max_delay_frames: int = 75
    jitter_sd_px: float = 0.0
    gaze_dropout_prob: float = 0.0
    detection_flicker_prob: float = 0.0
    detection_miss_prob: float = 0.0


def draw_delays(rng: np.random.Generator, mean_ms: float, sd_ms: float, n: int,
                period_ms: float = 20.0, max_frames: int = 75) -> np.ndarray:
    """Normal sensing times quantised to whole frames, at least one frame long."""
    raw = rng.normal(mean_ms, sd_ms, n)
    return np.clip(np.rint(raw / period_ms), 1, max_frames).astype(int)


def _check_cohort(spec: CohortSpec) -> None:
    if set(spec.n_per_group) - set(GROUPS):
        raise InvalidSpec(f"unknown groups {set(spec.n_per_group) - set(GROUPS)}")
    if not spec.n_per_group or any(v < 1 for v in spec.n_per_group.values()):
        raise InvalidSpec("every group needs at least one trial")
    for g in spec.n_per_group:
        if g not in spec.st_mean_ms or g not in spec.st_sd_ms:
            raise InvalidSpec(f"missing sensing-time moments for group {g!r}")
        if spec.st_sd_ms[g] < 0:
            raise InvalidSpec("sensing-time sd must be non-negative")


def generate_cohort(spec: CohortSpec) -> list[GeneratedTrial]:
    """Trials for every group, with per-group sensing-time moments as given."""
    _check_cohort(spec)
    root = np.random.SeedSequence(spec.seed)
    groups = [g for g in GROUPS if g in spec.n_per_group]
    group_seeds = root.spawn(len(groups))
    period = 1000.0 / spec.fps
    trials = []
    for g, gseed in zip(groups, group_seeds):
        n = spec.n_per_group[g]
        delay_rng, geo_seed = gseed.spawn(2)
        delays = draw_delays(np.random.default_rng(delay_rng), spec.st_mean_ms[g], spec.st_sd_ms[g],
                             n, period, spec.max_delay_frames)
        for i, (delay, tseed) in enumerate(zip(delays, geo_seed.spawn(n))):
            rng = np.random.default_rng(tseed)
            ts = random_spec(
                rng, trial_id=f"{g}_{i:03d}", group=g, delay_frames=int(delay),
                speed_range=spec.speed_range_kmh, distance_range=spec.distance_range_m, fps=spec.fps,
                jitter_sd_px=spec.jitter_sd_px, gaze_dropout_prob=spec.gaze_dropout_prob,
                detection_flicker_prob=spec.detection_flicker_prob,
                detection_miss_prob=spec.detection_miss_prob,
            )
            trials.append(generate_trial(ts))
    return trials


TRUTH_HEADER = ["trial_id", "t1_ms", "t2_ms", "st_ms", "igd_px", "ttc_s", "speed_kmh"]


def format_truth(truths) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRUTH_HEADER)
    for t in sorted(truths, key=lambda t: t.trial_id):
        ttc = "" if t.ttc_s is None else repr(t.ttc_s)
        w.writerow([t.trial_id, t.t1_ms, t.t2_ms, t.st_ms, t.igd_px, ttc, repr(t.speed_kmh)])
    return buf.getvalue()


def write_cohort(trials: list[GeneratedTrial], directory: str | Path) -> list[Path]:
    """Write every trial under ``directory/<trial_id>/`` plus ``truth.csv``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = [t.write(d / t.manifest.trial_id) for t in trials]
    (d / "truth.csv").write_text(format_truth(t.truth for t in trials), encoding="utf-8")
    return paths


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _scenario_from_mapping(values: dict[str, str]) -> ScenarioSpec:
    kwargs: dict = {}
    for key, raw in values.items():
        if key in ("fixation", "saccade_offset"):
            pair = _floats(raw)
            if len(pair) != 2:
                raise InvalidSpec(f"{key} needs two numbers")
            kwargs[key] = pair
        elif key == "distractor":
            kwargs[key] = None if raw.strip().lower() in ("", "none") else _floats(raw)
        elif key == "children":
            kwargs[key] = tuple(ChildPath(*_floats(part)) for part in raw.split(";") if part.strip())
        elif key == "dropout_windows":
            kwargs[key] = tuple(
                tuple(int(v) for v in part.split(":")) for part in raw.split(",") if part.strip()
            )
        elif key in ("trial_id", "subject_id", "group"):
            kwargs[key] = raw
        elif key == "crash_flag":
            kwargs[key] = raw.strip().lower() in ("1", "true", "yes")
        elif key in ("seed", "width", "height", "duration_frames", "hazard_onset_frame", "gaze_delay_frames"):
            kwargs[key] = int(raw)
        elif key in ScenarioSpec.__dataclass_fields__:
            kwargs[key] = float(raw)
        else:
            raise InvalidSpec(f"unknown scenario key {key!r}")
    return ScenarioSpec(**kwargs)


def _cohort_from_mapping(values: dict[str, str]) -> CohortSpec:
    kwargs: dict = {}
    n, mean, sd = dict(REFERENCE_N), dict(REFERENCE_MEAN_MS), dict(REFERENCE_SD_MS)
    for key, raw in values.items():
        prefix, _, group = key.partition("_")
        if prefix in ("n", "mean", "sd") and group in GROUPS:
            {"n": n, "mean": mean, "sd": sd}[prefix][group] = int(raw) if prefix == "n" else float(raw)
        elif key in ("speed_range_kmh", "distance_range_m"):
            kwargs[key] = _floats(raw)
        elif key in ("seed", "max_delay_frames"):
            kwargs[key] = int(raw)
        elif key in CohortSpec.__dataclass_fields__:
            kwargs[key] = float(raw)
        else:
            raise InvalidSpec(f"unknown cohort key {key!r}")
    return CohortSpec(n_per_group=n, st_mean_ms=mean, st_sd_ms=sd, **kwargs)


def spec_from_mapping(values: dict[str, str]) -> ScenarioSpec | CohortSpec:
    """Build a scenario or cohort spec from ``key = value`` pairs.

    ``kind = trial`` selects a single scenario; anything else a cohort.
    Cohort group sizes and moments use ``n_<group>``, ``mean_<group>`` and
    ``sd_<group>`` keys.
    """
    values = dict(values)
    kind = values.pop("kind", "cohort").strip()
    try:
        if kind == "trial":
            return _scenario_from_mapping(values)
        if kind == "cohort":
            return _cohort_from_mapping(values)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidSpec):
            raise
        raise InvalidSpec(str(exc)) from None
    raise InvalidSpec(f"unknown spec kind {kind!r}")
