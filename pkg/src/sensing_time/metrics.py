"""Per-trial sensing time, gaze distance, time-to-collision, speed and timing uncertainty."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .ingestion import DegenerateBBox, TelemetrySample


class MetricError(ValueError):
    pass


class NegativeInterval(MetricError):
    pass


class InvalidGazeAtOnset(MetricError):
    pass


class StationaryVehicle(MetricError):
    pass


class NoTelemetryAtOnset(MetricError):
    pass


class NonPositiveResolution(MetricError):
    pass


VALID = "Valid"
MISS = "Miss"
OUTLIER = "Outlier"
EXCLUDED = "Excluded"


def excluded_status(code) -> str:
    return f"{EXCLUDED}:{code}"


@dataclass(frozen=True)
class TrialMetrics:
    trial_id: str
    subject_id: str
    group: str
    st_ms: int | None
    speed_kmh: float | None
    igd_px: int | None
    ttc_s: float | None
    status: str
    crash_flag: bool = False

    @property
    def is_excluded(self) -> bool:
        return self.status.startswith(EXCLUDED)


@dataclass(frozen=True)
class UncertaintyReport:
    resolution_ms: float
    u_b_ms: float
    u_combined_ms: float


def sensing_time(t1_ms: int, t2_ms: int) -> int:
    if t2_ms < t1_ms:
        raise NegativeInterval(f"t2 = {t2_ms} ms precedes t1 = {t1_ms} ms")
    return t2_ms - t1_ms


def roi_center(bbox: Sequence[float]) -> tuple[float, float]:
    x0, y0, x1, y1 = bbox
    if x0 >= x1 or y0 >= y1:
        raise DegenerateBBox(f"bbox {tuple(bbox)} has no area")
    return (x0 + x1) / 2.0, (y0 + y1) / 2.0


def union_box(boxes: Sequence[Sequence[float]]) -> tuple[float, float, float, float]:
    if not boxes:
        raise ValueError("no boxes to merge")
    return (
        min(b[0] for b in boxes),
        min(b[1] for b in boxes),
        max(b[2] for b in boxes),
        max(b[3] for b in boxes),
    )


def round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def initial_gaze_distance(gaze_at_t1: tuple[float, float] | None, center: tuple[float, float]) -> int:
    """Euclidean pixel distance rounded to the nearest integer (halves round up)."""
    if gaze_at_t1 is None:
        raise InvalidGazeAtOnset("no valid gaze sample at hazard onset")
    return round_half_up(math.hypot(gaze_at_t1[0] - center[0], gaze_at_t1[1] - center[1]))


def time_to_collision(dist_m: float, speed_kmh: float, eps_kmh: float = 0.1) -> float:
    if speed_kmh <= eps_kmh:
        raise StationaryVehicle(f"speed {speed_kmh} km/h too low for a time-to-collision")
    return dist_m / (speed_kmh / 3.6)


def nearest_telemetry(telemetry: Sequence[TelemetrySample], t_ms: int) -> TelemetrySample:
    """Nearest sample to ``t_ms``; an exact tie goes to the earlier sample."""
    if not telemetry or not telemetry[0].t_ms <= t_ms <= telemetry[-1].t_ms:
        raise NoTelemetryAtOnset(f"telemetry does not cover t = {t_ms} ms")
    lo, hi = 0, len(telemetry) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if telemetry[mid].t_ms <= t_ms:
            lo = mid
        else:
            hi = mid
    a, b = telemetry[lo], telemetry[hi]
    return a if t_ms - a.t_ms <= b.t_ms - t_ms else b


def speed_at_onset(telemetry: Sequence[TelemetrySample], t1_ms: int) -> float:
    return nearest_telemetry(telemetry, t1_ms).speed_kmh


def type_b_uncertainty(resolution_ms: float) -> UncertaintyReport:
    """Uniform-distribution (resolution / sqrt(12)) standard uncertainty.

    ``u_combined_ms`` is the uncertainty of a difference of two independent
    timestamps at that resolution.
    """
    if not resolution_ms > 0:
        raise NonPositiveResolution(f"resolution must be positive, got {resolution_ms}")
    u_b = resolution_ms / math.sqrt(12.0)
    return UncertaintyReport(resolution_ms, u_b, math.sqrt(2.0) * u_b)
