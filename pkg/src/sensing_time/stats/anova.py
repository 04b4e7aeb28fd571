"""Welch's one-way ANOVA and Tukey-Kramer honest significant differences."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .ptukey import studentized_range_cdf, studentized_range_ppf
from .special import f_sf


class DegenerateGroup(ValueError):
    pass


@dataclass(frozen=True)
class WelchResult:
    F: float
    df1: float
    df2: float
    p: float


@dataclass(frozen=True)
class TukeyRow:
    group_a: str
    group_b: str
    diff: float
    lwr: float
    upr: float
    p_adj: float

    @property
    def label(self) -> str:
        return f"{self.group_a}-{self.group_b}"


def _as_arrays(groups) -> list[np.ndarray]:
    values = groups.values() if isinstance(groups, Mapping) else groups
    return [np.asarray(v, dtype=float) for v in values]


def welch_anova(groups: Mapping[str, Sequence[float]] | Sequence[Sequence[float]]) -> WelchResult:
    """Welch's heteroscedastic one-way ANOVA.

    Weights are n_i / s_i^2; the denominator degrees of freedom follow the
    Welch-Satterthwaite approximation.
    """
    arrays = _as_arrays(groups)
    k = len(arrays)
    if k < 2:
        raise DegenerateGroup("Welch's ANOVA needs at least two groups")
    n = np.array([a.size for a in arrays], dtype=float)
    if (n < 2).any():
        raise DegenerateGroup("every group needs at least two observations")
    means = np.array([a.mean() for a in arrays])
    var = np.array([a.var(ddof=1) for a in arrays])
    if (var <= 0).any():
        raise DegenerateGroup("every group needs a non-zero variance")
    w = n / var
    w_sum = w.sum()
    grand = (w * means).sum() / w_sum
    between = (w * (means - grand) ** 2).sum() / (k - 1)
    lam = ((1.0 - w / w_sum) ** 2 / (n - 1)).sum()
    correction = 1.0 + 2.0 * (k - 2) * lam / (k * k - 1)
    F = float(between / correction)
    df2 = float((k * k - 1) / (3.0 * lam))
    return WelchResult(F=F, df1=float(k - 1), df2=df2, p=f_sf(F, k - 1, df2))


def tukey_hsd(groups: Mapping[str, Sequence[float]], conf: float = 0.95) -> list[TukeyRow]:
    """All pairwise mean differences with Tukey-Kramer simultaneous intervals.

    Levels are taken in lexicographic order; each row reports later level
    minus earlier level, using the pooled within-group mean square.
    """
    levels = sorted(groups)
    if len(levels) < 2:
        raise DegenerateGroup("Tukey HSD needs at least two groups")
    arrays = {g: np.asarray(groups[g], dtype=float) for g in levels}
    if any(a.size < 1 for a in arrays.values()):
        raise DegenerateGroup("every group needs at least one observation")
    n_total = sum(a.size for a in arrays.values())
    k = len(levels)
    df = n_total - k
    if df < 1:
        raise DegenerateGroup("no residual degrees of freedom")
    sse = sum(((a - a.mean()) ** 2).sum() for a in arrays.values())
    mse = sse / df
    if mse <= 0:
        raise DegenerateGroup("pooled within-group variance is zero")
    q_crit = studentized_range_ppf(conf, k, df)
    rows = []
    for i, a in enumerate(levels):
        for b in levels[i + 1:]:
            diff = float(arrays[b].mean() - arrays[a].mean())
            se = math.sqrt(mse / 2.0 * (1.0 / arrays[a].size + 1.0 / arrays[b].size))
            half = q_crit * se
            p_adj = 1.0 - studentized_range_cdf(abs(diff) / se, k, df)
            rows.append(TukeyRow(b, a, diff, diff - half, diff + half, min(max(p_adj, 0.0), 1.0)))
    return rows
