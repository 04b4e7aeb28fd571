"""Quantiles, validity filters, box-plot statistics and group summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class EmptyData(ValueError):
    pass


class TooFewPoints(ValueError):
    pass


class EmptyGroup(ValueError):
    pass


def quantile(data: Sequence[float], q: float) -> float:
    """Linear interpolation between order statistics at position 1 + q (n - 1)."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    xs = sorted(float(v) for v in data)
    if not xs:
        raise EmptyData("quantile of empty data")
    h = q * (len(xs) - 1)
    lo = math.floor(h)
    hi = min(lo + 1, len(xs) - 1)
    return xs[lo] + (h - lo) * (xs[hi] - xs[lo])


def iqr_outlier_filter(values: Sequence[float], k: float = 3.0) -> tuple[list[float], list[float]]:
    """Split into (kept, removed); removed values lie strictly above Q3 + k IQR."""
    if len(values) < 4:
        raise TooFewPoints(f"outlier rule needs at least 4 points, got {len(values)}")
    q1, q3 = quantile(values, 0.25), quantile(values, 0.75)
    limit = q3 + k * (q3 - q1)
    kept = [v for v in values if v <= limit]
    removed = [v for v in values if v > limit]
    return kept, removed


def miss_filter(values: Sequence[float], max_st_ms: float = 500) -> tuple[list[float], list[float]]:
    """Split into (kept, missed); only values strictly below ``max_st_ms`` are kept."""
    return [v for v in values if v < max_st_ms], [v for v in values if v >= max_st_ms]


@dataclass(frozen=True)
class BoxStats:
    group: str
    n: int
    min: float
    q1: float
    median: float
    q3: float
    max: float
    iqr: float
    outliers: tuple[float, ...]


def box_stats(values: Sequence[float], group: str = "", k: float = 3.0) -> BoxStats:
    """Quartiles of all points; whiskers reach the extreme non-outlying points.

    Outliers use the same one-sided ``Q3 + k IQR`` rule as the cohort filter
    and are only flagged for groups of four or more points.
    """
    if not len(values):
        raise EmptyGroup(f"group {group!r} has no values")
    q1, med, q3 = (quantile(values, p) for p in (0.25, 0.5, 0.75))
    if len(values) >= 4:
        kept, removed = iqr_outlier_filter(values, k)
    else:
        kept, removed = list(values), []
    return BoxStats(
        group=group, n=len(values), min=min(kept), q1=q1, median=med, q3=q3, max=max(kept),
        iqr=q3 - q1, outliers=tuple(sorted(removed)),
    )


@dataclass(frozen=True)
class GroupSummary:
    group: str
    variable: str
    n: int
    min: float
    max: float
    mean: float
    sd: float
    median: float


def summarize(values: Sequence[float], group: str = "", variable: str = "st_ms") -> GroupSummary:
    """Range, mean, Bessel-corrected SD and median of one group."""
    xs = np.asarray(values, dtype=float)
    if xs.size == 0:
        raise EmptyGroup(f"group {group!r} has no {variable} values")
    sd = float(xs.std(ddof=1)) if xs.size > 1 else 0.0
    return GroupSummary(
        group=group, variable=variable, n=int(xs.size), min=float(xs.min()), max=float(xs.max()),
        mean=float(xs.mean()), sd=sd, median=quantile(xs, 0.5),
    )


def group_summary(groups: dict[str, Sequence[float]], variable: str = "st_ms") -> dict[str, GroupSummary]:
    return {g: summarize(v, g, variable) for g, v in groups.items()}
