"""Parsing and frame-grid alignment of the gaze, detection and telemetry streams."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence, Union

import numpy as np

GROUPS = ("fit", "cond_fit", "unfit")

Source = Union[str, os.PathLike, IO[str]]


class IngestionError(ValueError):
    """Base class for stream parsing problems; carries the source and line."""

    def __init__(self, message: str, source: str = "<stream>", line: int | None = None):
        self.source = source
        self.line = line
        where = source if line is None else f"{source}:{line}"
        super().__init__(f"{where}: {message}")


class MalformedRow(IngestionError):
    pass


class MalformedRecord(IngestionError):
    pass


class NonMonotonicTime(IngestionError):
    pass


class DegenerateBBox(IngestionError):
    pass


class BBoxOutOfFrame(IngestionError):
    pass


class MalformedManifest(IngestionError):
    pass


class EmptyStream(IngestionError):
    """A stream has no samples; the trial is excluded as missing data."""


class TelemetryGapWarning(UserWarning):
    pass


@dataclass(frozen=True)
class GazeSample:
    t_ms: int
    x_px: float
    y_px: float
    valid: bool


@dataclass(frozen=True)
class Detection:
    frame_idx: int
    t_ms: int
    label: str
    conf: float
    bbox: tuple[float, float, float, float]


@dataclass(frozen=True)
class TelemetrySample:
    t_ms: int
    speed_kmh: float
    dist_m: float


@dataclass(frozen=True)
class TrialManifest:
    trial_id: str
    subject_id: str
    group: str
    fps: float = 50.0
    width: int = 960
    height: int = 540
    target_labels: frozenset[str] = frozenset({"person"})
    gaze_path: Path | None = None
    detections_path: Path | None = None
    telemetry_path: Path | None = None
    overrides_path: Path | None = None
    crash_flag: bool = False

    def __post_init__(self):
        if self.group not in GROUPS:
            raise ValueError(f"group must be one of {GROUPS}, got {self.group!r}")
        if not self.fps > 0:
            raise ValueError("fps must be positive")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("frame width and height must be positive")
        if not self.target_labels:
            raise ValueError("target_labels must not be empty")

    @property
    def period_ms(self) -> float:
        return 1000.0 / self.fps


@dataclass(frozen=True, eq=False)
class SyncedTrial:
    """All three streams mapped onto one slot per video frame.

    ``gaze_held`` marks slots filled by carrying the previous valid sample
    forward across a short dropout.
    """

    manifest: TrialManifest
    frame_times: np.ndarray
    gaze_x: np.ndarray
    gaze_y: np.ndarray
    gaze_valid: np.ndarray
    gaze_held: np.ndarray
    detections: tuple[tuple[Detection, ...], ...]
    speed_kmh: np.ndarray
    dist_m: np.ndarray
    telemetry_valid: np.ndarray
    telemetry: tuple[TelemetrySample, ...] = field(default=())

    @property
    def n_frames(self) -> int:
        return len(self.frame_times)

    @property
    def period_ms(self) -> float:
        return self.manifest.period_ms

    def frame_index(self, t_ms: int) -> int:
        idx = int(np.searchsorted(self.frame_times, t_ms))
        if idx >= self.n_frames or self.frame_times[idx] != t_ms:
            raise KeyError(f"{t_ms} ms is not on the frame grid")
        return idx


def frame_time(frame_idx: int, fps: float) -> int:
    return int(math.floor(frame_idx * 1000.0 / fps + 0.5))


def _open(source: Source):
    if hasattr(source, "read"):
        return source, getattr(source, "name", "<stream>"), False
    path = Path(source)
    return open(path, newline="", encoding="utf-8"), str(path), True


def _read_lines(source: Source) -> tuple[list[str], str]:
    fh, name, owned = _open(source)
    try:
        return fh.read().splitlines(), name
    finally:
        if owned:
            fh.close()


def _parse_int(text: str) -> int:
    text = text.strip()
    if not text or not text.lstrip("-").isdigit():
        raise ValueError(f"not an integer: {text!r}")
    return int(text)


def _parse_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"not a finite number: {text!r}")
    return value


def _csv_rows(lines: list[str], header: str, name: str, error=MalformedRow):
    """Yield (line_number, fields) for a CSV body after checking its header."""
    if not lines:
        return
    if lines[0].strip().lstrip("\ufeff") != header:
        raise error(f"expected header {header!r}, got {lines[0]!r}", name, 1)
    width = header.count(",") + 1
    for lineno, row in enumerate(csv.reader(lines[1:]), start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != width:
            raise error(f"expected {width} fields, got {len(row)}", name, lineno)
        yield lineno, row


def parse_gaze(source: Source) -> list[GazeSample]:
    lines, name = _read_lines(source)
    samples: list[GazeSample] = []
    for lineno, row in _csv_rows(lines, "t_ms,x_px,y_px,valid", name):
        try:
            t = _parse_int(row[0])
            x, y = _parse_float(row[1]), _parse_float(row[2])
            flag = row[3].strip()
            if flag not in ("0", "1"):
                raise ValueError(f"valid must be 0 or 1, got {flag!r}")
            if t < 0:
                raise ValueError("negative timestamp")
        except ValueError as exc:
            raise MalformedRow(str(exc), name, lineno) from None
        if samples and t <= samples[-1].t_ms:
            raise NonMonotonicTime(f"t_ms {t} after {samples[-1].t_ms}", name, lineno)
        samples.append(GazeSample(t, x, y, flag == "1"))
    return samples


def parse_telemetry(source: Source, max_gap_ms: int = 1000) -> list[TelemetrySample]:
    """Parse the simulator log. Gaps longer than ``max_gap_ms`` only warn."""
    lines, name = _read_lines(source)
    samples: list[TelemetrySample] = []
    for lineno, row in _csv_rows(lines, "t_ms,speed_kmh,dist_m", name):
        try:
            t = _parse_int(row[0])
            speed, dist = _parse_float(row[1]), _parse_float(row[2])
            if t < 0:
                raise ValueError("negative timestamp")
            if speed < 0:
                raise ValueError(f"negative speed {speed}")
            if dist < 0:
                raise ValueError(f"negative distance {dist}")
        except ValueError as exc:
            raise MalformedRow(str(exc), name, lineno) from None
        if samples:
            prev = samples[-1].t_ms
            if t <= prev:
                raise NonMonotonicTime(f"t_ms {t} after {prev}", name, lineno)
            if t - prev > max_gap_ms:
                warnings.warn(
                    f"{name}:{lineno}: telemetry gap of {t - prev} ms", TelemetryGapWarning, stacklevel=2
                )
        samples.append(TelemetrySample(t, speed, dist))
    return samples


def _coord(value) -> float:
    if type(value) is not float and (type(value) is not int):
        raise ValueError(f"not a number: {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"not a finite number: {value!r}")
    return value


_DETECTION_KEYS = ("frame", "t_ms", "label", "conf", "x_min", "y_min", "x_max", "y_max")


def parse_detections(
    source: Source, width: float | None = None, height: float | None = None, fps: float | None = None
) -> list[Detection]:
    """Parse line-delimited JSON detector output.

    Frame bounds are checked only when ``width``/``height`` are given, and
    the ``t_ms``/``frame`` consistency only when ``fps`` is given. Records are
    returned stably sorted by frame index.
    """
    lines, name = _read_lines(source)
    numbered = [(i, text) for i, text in enumerate(lines, start=1) if text.strip()]
    records = None
    try:
        # one decoder call for the whole stream; per-line decoding on failure
        records = json.loads("[" + ",".join(text for _, text in numbered) + "]")
        if len(records) != len(numbered):
            records = None
    except ValueError:
        pass
    if records is None:
        records = []
        for lineno, text in numbered:
            try:
                records.append(json.loads(text))
            except ValueError as exc:
                # raised in line order by the validation loop below
                records.append(exc)
    out: list[Detection] = []
    for (lineno, _), rec in zip(numbered, records):
        try:
            if isinstance(rec, ValueError):
                raise ValueError(f"invalid JSON: {rec}")
            if not isinstance(rec, dict):
                raise ValueError("record is not an object")
            missing = [k for k in _DETECTION_KEYS if k not in rec]
            if missing:
                raise ValueError(f"missing keys {missing}")
            frame, t = rec["frame"], rec["t_ms"]
            if type(frame) is not int or type(t) is not int:
                raise ValueError("frame and t_ms must be integers")
            if frame < 0:
                raise ValueError("negative frame index")
            label = rec["label"]
            if not isinstance(label, str) or not label:
                raise ValueError("label must be a non-empty string")
            conf = _coord(rec["conf"])
            if not 0.0 <= conf <= 1.0:
                raise ValueError(f"conf {conf} outside [0, 1]")
            box = (_coord(rec["x_min"]), _coord(rec["y_min"]), _coord(rec["x_max"]), _coord(rec["y_max"]))
        except (ValueError, TypeError) as exc:
            raise MalformedRecord(str(exc), name, lineno) from None
        if fps is not None and t != frame_time(frame, fps):
            raise MalformedRecord(f"t_ms {t} does not match frame {frame} at {fps} fps", name, lineno)
        x0, y0, x1, y1 = box
        if x0 >= x1 or y0 >= y1:
            raise DegenerateBBox(f"bbox {box} has no area", name, lineno)
        if width is not None and (x0 < 0 or x1 > width):
            raise BBoxOutOfFrame(f"bbox {box} outside frame width {width}", name, lineno)
        if height is not None and (y0 < 0 or y1 > height):
            raise BBoxOutOfFrame(f"bbox {box} outside frame height {height}", name, lineno)
        out.append(Detection(frame, t, label, conf, box))
    out.sort(key=lambda d: d.frame_idx)
    return out


def _to_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes"):
        return True
    if low in ("0", "false", "no", ""):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def read_key_values(source: Source) -> dict[str, str]:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    lines, name = _read_lines(source)
    out: dict[str, str] = {}
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise MalformedManifest(f"expected 'key = value', got {raw!r}", name, lineno)
        key, value = (part.strip() for part in text.split("=", 1))
        if not key:
            raise MalformedManifest("empty key", name, lineno)
        out[key] = value
    return out


def parse_manifest(path: str | os.PathLike) -> TrialManifest:
    """Load a trial manifest; stream paths are resolved relative to it."""
    path = Path(path)
    kv = read_key_values(path)
    base = path.parent

    def resolve(key):
        return base / kv[key] if kv.get(key) else None

    try:
        labels = kv.get("target_labels", "person")
        return TrialManifest(
            trial_id=kv["trial_id"],
            subject_id=kv.get("subject_id", kv["trial_id"]),
            group=kv["group"],
            fps=float(kv.get("fps", 50)),
            width=int(kv.get("width", 960)),
            height=int(kv.get("height", 540)),
            target_labels=frozenset(s.strip() for s in labels.split(",") if s.strip()),
            gaze_path=resolve("gaze"),
            detections_path=resolve("detections"),
            telemetry_path=resolve("telemetry"),
            overrides_path=resolve("overrides"),
            crash_flag=_to_bool(kv.get("crash_flag", "0")),
        )
    except KeyError as exc:
        raise MalformedManifest(f"missing field {exc.args[0]!r}", str(path)) from None
    except ValueError as exc:
        raise MalformedManifest(str(exc), str(path)) from None


def format_manifest(m: TrialManifest, base: Path | None = None) -> str:
    def rel(p):
        if p is None:
            return ""
        return str(Path(p).relative_to(base)) if base is not None else str(p)

    lines = [
        f"trial_id = {m.trial_id}",
        f"subject_id = {m.subject_id}",
        f"group = {m.group}",
        f"fps = {m.fps:g}",
        f"width = {m.width}",
        f"height = {m.height}",
        f"target_labels = {','.join(sorted(m.target_labels))}",
        f"gaze = {rel(m.gaze_path)}",
        f"detections = {rel(m.detections_path)}",
        f"telemetry = {rel(m.telemetry_path)}",
    ]
    if m.overrides_path is not None:
        lines.append(f"overrides = {rel(m.overrides_path)}")
    lines.append(f"crash_flag = {int(m.crash_flag)}")
    return "\n".join(lines) + "\n"


def _num(value: float) -> str:
    return repr(float(value))


def format_gaze(samples: Iterable[GazeSample]) -> str:
    buf = io.StringIO()
    buf.write("t_ms,x_px,y_px,valid\n")
    for s in samples:
        buf.write(f"{s.t_ms},{_num(s.x_px)},{_num(s.y_px)},{int(s.valid)}\n")
    return buf.getvalue()


def format_telemetry(samples: Iterable[TelemetrySample]) -> str:
    buf = io.StringIO()
    buf.write("t_ms,speed_kmh,dist_m\n")
    for s in samples:
        buf.write(f"{s.t_ms},{_num(s.speed_kmh)},{_num(s.dist_m)}\n")
    return buf.getvalue()


def format_detections(detections: Iterable[Detection]) -> str:
    """One JSON object per line, keys in a fixed order."""
    labels: dict[str, str] = {}
    lines = []
    for d in detections:
        label = labels.get(d.label)
        if label is None:
            label = labels[d.label] = json.dumps(d.label)
        x0, y0, x1, y1 = (repr(float(v)) for v in d.bbox)
        lines.append(
            f'{{"frame": {d.frame_idx}, "t_ms": {d.t_ms}, "label": {label}, "conf": {float(d.conf)!r}, '
            f'"x_min": {x0}, "y_min": {y0}, "x_max": {x1}, "y_max": {y1}}}\n'
        )
    return "".join(lines)


def _nearest_slots(sample_times: np.ndarray, frame_times: np.ndarray, half: float) -> np.ndarray:
    """Index of the nearest sample for every slot, or -1 beyond ``half`` ms.

    Equidistant samples resolve to the earlier one.
    """
    if len(sample_times) == 0:
        return np.full(len(frame_times), -1)
    right = np.searchsorted(sample_times, frame_times, side="left")
    left = np.clip(right - 1, 0, len(sample_times) - 1)
    right_c = np.clip(right, 0, len(sample_times) - 1)
    d_left = np.abs(frame_times - sample_times[left])
    d_right = np.abs(sample_times[right_c] - frame_times)
    pick = np.where(d_left <= d_right, left, right_c)
    dist = np.minimum(d_left, d_right)
    return np.where(dist <= half, pick, -1)


def align(
    manifest: TrialManifest,
    gaze: Sequence[GazeSample],
    detections: Sequence[Detection],
    telemetry: Sequence[TelemetrySample],
    max_gap_ms: float = 100,
    n_frames: int | None = None,
) -> SyncedTrial:
    """Map the three streams onto the video frame grid.

    Each slot takes the nearest sample within half a frame period. Runs of
    slots without a valid gaze sample are filled with the last valid sample
    when the run spans at most ``max_gap_ms``; longer runs stay invalid.
    """
    if not gaze:
        raise EmptyStream("gaze stream is empty", "gaze")
    if not telemetry:
        raise EmptyStream("telemetry stream is empty", "telemetry")
    if not detections:
        raise EmptyStream("detection stream is empty", "detections")
    fps = manifest.fps
    period = manifest.period_ms
    if n_frames is None:
        last_t = max(gaze[-1].t_ms, telemetry[-1].t_ms, max(d.t_ms for d in detections))
        n_frames = int(math.floor(last_t / period + 0.5)) + 1
        n_frames = max(n_frames, max(d.frame_idx for d in detections) + 1)
    frame_times = np.array([frame_time(i, fps) for i in range(n_frames)], dtype=np.int64)
    half = period / 2.0

    g_t = np.array([s.t_ms for s in gaze], dtype=np.int64)
    g_idx = _nearest_slots(g_t, frame_times, half)
    g_x = np.array([s.x_px for s in gaze], dtype=float)
    g_y = np.array([s.y_px for s in gaze], dtype=float)
    g_ok = np.array([s.valid for s in gaze], dtype=bool)

    has = g_idx >= 0
    valid = np.zeros(n_frames, dtype=bool)
    valid[has] = g_ok[g_idx[has]]
    gx = np.zeros(n_frames)
    gy = np.zeros(n_frames)
    gx[valid] = g_x[g_idx[valid]]
    gy[valid] = g_y[g_idx[valid]]
    held = np.zeros(n_frames, dtype=bool)

    i = 0
    while i < n_frames:
        if valid[i]:
            i += 1
            continue
        j = i
        while j < n_frames and not valid[j]:
            j += 1
        # run of invalid slots [i, j)
        span = (j - i) * period
        if i > 0 and span <= max_gap_ms + 1e-9:
            gx[i:j], gy[i:j] = gx[i - 1], gy[i - 1]
            held[i:j] = True
        i = j
    gaze_valid = valid | held

    per_frame: list[list[Detection]] = [[] for _ in range(n_frames)]
    for d in detections:
        if d.frame_idx < n_frames:
            per_frame[d.frame_idx].append(d)
    canon = tuple(
        tuple(sorted(ds, key=lambda d: (d.label, d.bbox, d.conf))) for ds in per_frame
    )

    t_t = np.array([s.t_ms for s in telemetry], dtype=np.int64)
    t_idx = _nearest_slots(t_t, frame_times, half)
    t_ok = t_idx >= 0
    speed = np.full(n_frames, np.nan)
    dist = np.full(n_frames, np.nan)
    speeds = np.array([s.speed_kmh for s in telemetry])
    dists = np.array([s.dist_m for s in telemetry])
    speed[t_ok] = speeds[t_idx[t_ok]]
    dist[t_ok] = dists[t_idx[t_ok]]

    return SyncedTrial(
        manifest=manifest,
        frame_times=frame_times,
        gaze_x=gx,
        gaze_y=gy,
        gaze_valid=gaze_valid,
        gaze_held=held,
        detections=canon,
        speed_kmh=speed,
        dist_m=dist,
        telemetry_valid=t_ok,
        telemetry=tuple(telemetry),
    )


def load_trial(manifest: TrialManifest, max_gap_ms: float = 100) -> SyncedTrial:
    """Parse the manifest's stream files and align them."""
    gaze = parse_gaze(manifest.gaze_path)
    dets = parse_detections(manifest.detections_path, manifest.width, manifest.height, manifest.fps)
    tele = parse_telemetry(manifest.telemetry_path)
    return align(manifest, gaze, dets, tele, max_gap_ms=max_gap_ms)
