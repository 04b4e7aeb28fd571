"""Run configuration shared by the command line and the library entry points."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

from .ingestion import read_key_values

FILTER_ORDERS = ("miss_first", "iqr_first")


@dataclass(frozen=True)
class RunConfig:
    debounce_frames: int = 2
    conf_min: float = 0.25
    gaze_radius_px: float = 0.0
    max_gap_ms: float = 100.0
    max_st_ms: float = 500.0
    iqr_k: float = 3.0
    conf_level: float = 0.95
    glm_alpha: float = 0.001
    low_st_ms: float = 120.0
    resolution_ms: float = 20.0
    filter_order: str = "miss_first"
    seed: int = 0
    jobs: int = 1
    input: str = ""
    output: str = ""

    def __post_init__(self):
        if self.debounce_frames < 1:
            raise ValueError("debounce_frames must be >= 1")
        if not 0.0 <= self.conf_min <= 1.0:
            raise ValueError("conf_min must lie in [0, 1]")
        if self.gaze_radius_px < 0:
            raise ValueError("gaze_radius_px must be >= 0")
        for name in ("max_gap_ms", "max_st_ms", "iqr_k", "resolution_ms"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.conf_level < 1.0 or not 0.0 < self.glm_alpha < 1.0:
            raise ValueError("confidence level and alpha must lie in (0, 1)")
        if self.filter_order not in FILTER_ORDERS:
            raise ValueError(f"filter_order must be one of {FILTER_ORDERS}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    def to_text(self) -> str:
        return "".join(f"{f.name} = {getattr(self, f.name)!s}\n" for f in fields(self))

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> "RunConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = set(values) - set(known)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        for key, raw in values.items():
            kind = known[key].type
            if kind == "int":
                kwargs[key] = int(raw)
            elif kind == "float":
                kwargs[key] = float(raw)
            else:
                kwargs[key] = str(raw)
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        return cls.from_mapping(read_key_values(path))

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})
