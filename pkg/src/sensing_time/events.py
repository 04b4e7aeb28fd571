"""Hazard onset, first gaze-on-target, exclusion classification and overrides."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .ingestion import SyncedTrial


class Exclusion(str, enum.Enum):
    TILTED_GLASSES = "TiltedGlasses"
    MISSING_DATA = "MissingData"
    ANTICIPATORY = "Anticipatory"
    ALTERED_POSITIONING = "AlteredPositioning"
    GAZE_LOSS_OR_FROZEN = "GazeLossOrFrozen"
    RECORDING_PAUSE = "RecordingPause"
    NEVER_LOOKED = "NeverLooked"

    def __str__(self):
        return self.value


class EventError(Exception):
    pass


class NoHazardDetected(EventError):
    pass


class NeverLooked(EventError):
    pass


class UnknownField(EventError):
    pass


class InvariantViolation(EventError):
    pass


@dataclass(frozen=True)
class Override:
    trial_id: str
    field: str
    value: str
    reason: str

    def __post_init__(self):
        if not self.reason.strip():
            raise ValueError(f"override of {self.field} for {self.trial_id} has no reason")


@dataclass(frozen=True)
class TrialEvents:
    trial_id: str
    t1_ms: int | None = None
    t2_ms: int | None = None
    anticipatory: bool = False
    exclusion: Exclusion | None = None
    applied: tuple[Override, ...] = ()

    def check(self):
        if self.anticipatory and self.t1_ms is not None and self.t2_ms != self.t1_ms:
            raise InvariantViolation(f"{self.trial_id}: anticipatory trial must have t2 == t1")
        if self.t1_ms is not None and self.t2_ms is not None and not self.anticipatory:
            if self.t2_ms < self.t1_ms:
                raise InvariantViolation(
                    f"{self.trial_id}: t2 = {self.t2_ms} ms precedes t1 = {self.t1_ms} ms"
                )
        if self.exclusion is None and (self.t1_ms is None or self.t2_ms is None):
            raise InvariantViolation(f"{self.trial_id}: a valid trial needs both t1 and t2")
        return self

    @property
    def st_ms(self) -> int | None:
        if self.exclusion is not None or self.t1_ms is None or self.t2_ms is None:
            return None
        return self.t2_ms - self.t1_ms


def _target_boxes(trial: SyncedTrial, frame: int, conf_min: float) -> list[tuple[float, ...]]:
    labels = trial.manifest.target_labels
    return [d.bbox for d in trial.detections[frame] if d.label in labels and d.conf >= conf_min]


def target_frames(trial: SyncedTrial, conf_min: float = 0.25) -> np.ndarray:
    """Boolean mask of frames holding at least one qualifying target detection."""
    return np.array([bool(_target_boxes(trial, i, conf_min)) for i in range(trial.n_frames)], dtype=bool)


def onset_frame(trial: SyncedTrial, debounce_frames: int = 2, conf_min: float = 0.25) -> int:
    if debounce_frames < 1:
        raise ValueError("debounce_frames must be >= 1")
    run = 0
    for i, present in enumerate(target_frames(trial, conf_min)):
        run = run + 1 if present else 0
        if run == debounce_frames:
            return i - debounce_frames + 1
    raise NoHazardDetected(f"{trial.manifest.trial_id}: no run of {debounce_frames} target frames")


def detect_hazard_onset(trial: SyncedTrial, debounce_frames: int = 2, conf_min: float = 0.25) -> int:
    """Time of the first frame starting a run of ``debounce_frames`` target frames."""
    return int(trial.frame_times[onset_frame(trial, debounce_frames, conf_min)])


def gaze_in_boxes(x: float, y: float, boxes: Iterable[Sequence[float]], radius: float = 0.0) -> bool:
    """Boundary-inclusive point test against boxes dilated by ``radius``."""
    for x0, y0, x1, y1 in boxes:
        if x0 - radius <= x <= x1 + radius and y0 - radius <= y <= y1 + radius:
            return True
    return False


def _hit_frame(trial: SyncedTrial, start: int, radius: float, conf_min: float) -> int | None:
    for i in range(start, trial.n_frames):
        if not trial.gaze_valid[i]:
            continue
        if gaze_in_boxes(trial.gaze_x[i], trial.gaze_y[i], _target_boxes(trial, i, conf_min), radius):
            return i
    return None


def detect_gaze_hit(
    trial: SyncedTrial, t1_ms: int, gaze_radius_px: float = 0.0, conf_min: float = 0.25
) -> tuple[int, bool]:
    """Return (t2_ms, anticipatory) for the first frame at/after t1 with gaze on a target."""
    if gaze_radius_px < 0:
        raise ValueError("gaze_radius_px must be >= 0")
    start = trial.frame_index(t1_ms)
    hit = _hit_frame(trial, start, gaze_radius_px, conf_min)
    if hit is None:
        raise NeverLooked(f"{trial.manifest.trial_id}: gaze never reached a target after {t1_ms} ms")
    return int(trial.frame_times[hit]), hit == start


def detect_frozen_gaze(trial: SyncedTrial) -> bool:
    """True when every recorded valid gaze point is bit-identical.

    Slots filled by hold-forward are ignored; at least two recorded valid
    samples are needed to call a stream frozen.
    """
    own = trial.gaze_valid & ~trial.gaze_held
    if own.sum() < 2:
        return False
    xs, ys = trial.gaze_x[own], trial.gaze_y[own]
    return bool(np.all(xs == xs[0]) and np.all(ys == ys[0]))


def classify(
    trial: SyncedTrial, debounce_frames: int = 2, conf_min: float = 0.25, gaze_radius_px: float = 0.0
) -> TrialEvents:
    """Run onset and hit detection and assign an exclusion code where needed."""
    tid = trial.manifest.trial_id
    if not trial.gaze_valid.any() or detect_frozen_gaze(trial):
        return TrialEvents(tid, exclusion=Exclusion.GAZE_LOSS_OR_FROZEN)
    try:
        start = onset_frame(trial, debounce_frames, conf_min)
    except NoHazardDetected:
        return TrialEvents(tid, exclusion=Exclusion.MISSING_DATA)
    t1 = int(trial.frame_times[start])
    if not trial.gaze_valid[start]:
        return TrialEvents(tid, t1_ms=t1, exclusion=Exclusion.GAZE_LOSS_OR_FROZEN)
    hit = _hit_frame(trial, start, gaze_radius_px, conf_min)
    end = trial.n_frames if hit is None else hit
    if not trial.gaze_valid[start:end].all():
        # a long dropout between onset and hit leaves the hit time unknown
        return TrialEvents(tid, t1_ms=t1, exclusion=Exclusion.GAZE_LOSS_OR_FROZEN)
    if hit is None:
        return TrialEvents(tid, t1_ms=t1, exclusion=Exclusion.NEVER_LOOKED)
    t2 = int(trial.frame_times[hit])
    if hit == start:
        return TrialEvents(tid, t1, t2, anticipatory=True, exclusion=Exclusion.ANTICIPATORY)
    return TrialEvents(tid, t1, t2)


_OVERRIDE_FIELDS = ("t1_ms", "t2_ms", "exclusion")


def _parse_exclusion(value: str) -> Exclusion | None:
    if value.strip() in ("", "None", "none"):
        return None
    try:
        return Exclusion(value.strip())
    except ValueError:
        raise InvariantViolation(f"unknown exclusion code {value!r}") from None


def apply_overrides(events: TrialEvents, overrides: Sequence[Override]) -> TrialEvents:
    """Apply manual corrections in order and re-check the event invariants."""
    out = events
    for ov in overrides:
        if ov.trial_id != events.trial_id:
            raise ValueError(f"override for {ov.trial_id} applied to {events.trial_id}")
        if ov.field not in _OVERRIDE_FIELDS:
            raise UnknownField(f"cannot override {ov.field!r}")
        if ov.field == "exclusion":
            out = replace(out, exclusion=_parse_exclusion(ov.value))
        else:
            try:
                value = int(ov.value)
            except ValueError:
                raise InvariantViolation(f"{ov.field} override {ov.value!r} is not an integer") from None
            out = replace(out, **{ov.field: value})
            # a corrected hit time later than onset is no longer anticipatory
            out = replace(out, anticipatory=out.anticipatory and out.t1_ms == out.t2_ms)
        out = replace(out, applied=out.applied + (ov,))
    return out.check()


def read_overrides(path: str | Path) -> list[Override]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["trial_id", "field", "value", "reason"]:
            raise ValueError(f"{path}: expected header trial_id,field,value,reason")
        return [Override(r["trial_id"], r["field"], r["value"], r["reason"]) for r in reader]


def write_overrides(path: str | Path, overrides: Iterable[Override]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial_id", "field", "value", "reason"])
        for ov in overrides:
            w.writerow([ov.trial_id, ov.field, ov.value, ov.reason])
