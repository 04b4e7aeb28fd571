"""Pearson product-moment correlation with a two-sided t test."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .special import inc_beta_pair


class ZeroVariance(ValueError):
    pass


@dataclass(frozen=True)
class PearsonResult:
    r: float
    p: float
    n: int


def pearson_r(x: Sequence[float], y: Sequence[float]) -> PearsonResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("x and y differ in length")
    n = x.size
    if n < 3:
        raise ValueError(f"correlation test needs n >= 3, got {n}")
    xc, yc = x - x.mean(), y - y.mean()
    sxx, syy = float(xc @ xc), float(yc @ yc)
    if sxx == 0 or syy == 0:
        raise ZeroVariance("one of the variables is constant")
    r = float(xc @ yc) / math.sqrt(sxx * syy)
    r = min(max(r, -1.0), 1.0)
    r2 = r * r
    if r2 >= 1.0:
        return PearsonResult(r, 0.0, n)
    # P(|T| > |t|) with t^2 = r^2 (n-2) / (1-r^2) reduces to I_{1-r^2}((n-2)/2, 1/2)
    p = inc_beta_pair(1.0 - r2, (n - 2) / 2.0, 0.5, y=r2)[0]
    return PearsonResult(r, p, n)
