"""Shapiro-Wilk W test using Royston's 1995 approximation (algorithm AS R94)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import ndtr, ndtri


class SampleSizeOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class ShapiroResult:
    W: float
    p: float
    n: int


# polynomial coefficients, lowest order first
_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.5440, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


def _poly(coef, x: float) -> float:
    out = 0.0
    for c in reversed(coef):
        out = out * x + c
    return out


def shapiro_weights(n: int) -> np.ndarray:
    """Antisymmetric coefficient vector for ``n`` sorted observations."""
    half = n // 2
    if n == 3:
        a = np.array([math.sqrt(0.5)])
    else:
        m = ndtri((np.arange(1, half + 1) - 0.375) / (n + 0.25))
        summ2 = 2.0 * float(m @ m)
        ssumm2 = math.sqrt(summ2)
        rsn = 1.0 / math.sqrt(n)
        a1 = _poly(_C1, rsn) - m[0] / ssumm2
        if n > 5:
            a2 = -m[1] / ssumm2 + _poly(_C2, rsn)
            fac = math.sqrt((summ2 - 2 * m[0] ** 2 - 2 * m[1] ** 2) / (1 - 2 * a1 ** 2 - 2 * a2 ** 2))
            a = -m / fac
            a[0], a[1] = a1, a2
        else:
            fac = math.sqrt((summ2 - 2 * m[0] ** 2) / (1 - 2 * a1 ** 2))
            a = -m / fac
            a[0] = a1
    # a[i] are positive weights for the upper half, largest first
    full = np.zeros(n)
    full[:half] = -a
    full[n - half:] = a[::-1]
    return full


def shapiro_wilk(x: Sequence[float]) -> ShapiroResult:
    xs = np.sort(np.asarray(x, dtype=float))
    n = xs.size
    if not 3 <= n <= 5000:
        raise SampleSizeOutOfRange(f"Shapiro-Wilk needs 3 <= n <= 5000, got {n}")
    rng = xs[-1] - xs[0]
    if rng < 1e-19 * max(1.0, abs(xs[0])):
        raise ValueError("all observations are identical")
    a = shapiro_weights(n)
    # W as the squared correlation of the data with the weights
    xs = xs / rng
    ac = a - a.mean()
    xc = xs - xs.mean()
    ssa, ssx, sax = float(ac @ ac), float(xc @ xc), float(ac @ xc)
    root = math.sqrt(ssa * ssx)
    w1 = (root - sax) * (root + sax) / (ssa * ssx)
    W = 1.0 - w1
    return ShapiroResult(W=W, p=_p_value(W, w1, n), n=n)


def _p_value(W: float, w1: float, n: int) -> float:
    if n == 3:
        p = 6.0 / math.pi * (math.asin(math.sqrt(W)) - math.pi / 3.0)
        return max(p, 0.0)
    if w1 <= 0:
        return 1.0
    y = math.log(w1)
    if n <= 11:
        gamma = _poly(_G, n)
        if y >= gamma:
            return 1e-99
        y = -math.log(gamma - y)
        m = _poly(_C3, n)
        s = math.exp(_poly(_C4, n))
    else:
        ln = math.log(n)
        m = _poly(_C5, ln)
        s = math.exp(_poly(_C6, ln))
    return float(ndtr((m - y) / s))
