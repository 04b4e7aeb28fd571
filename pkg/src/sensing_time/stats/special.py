"""Regularized incomplete beta function and the F and t distributions built on it."""

from __future__ import annotations

import math

_EPS = 1e-16
_TINY = 1e-300
_MAXIT = 10_000


class NonConvergence(ArithmeticError):
    def __init__(self, message: str, achieved: float | None = None):
        self.achieved = achieved
        super().__init__(message if achieved is None else f"{message} (achieved {achieved:.3g})")


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b), evaluated by the modified Lentz method."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    delta = math.inf
    for m in range(1, _MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise NonConvergence(f"incomplete beta continued fraction for a={a}, b={b}, x={x}", abs(delta - 1.0))


def _front(a: float, b: float, x: float, y: float) -> float:
    log_beta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    return math.exp(a * math.log(x) + b * math.log(y) - log_beta)


def inc_beta_pair(x: float, a: float, b: float, y: float | None = None) -> tuple[float, float]:
    """Return ``(I_x(a, b), 1 - I_x(a, b))``, each to full relative precision.

    Pass ``y = 1 - x`` explicitly when it is known more accurately than the
    subtraction would give.
    """
    if a <= 0 or b <= 0:
        raise ValueError(f"shape parameters must be positive, got a={a}, b={b}")
    if y is None:
        y = 1.0 - x
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0, 1.0
    if y == 0.0:
        return 1.0, 0.0
    if x < (a + 1.0) / (a + b + 2.0):
        lower = _front(a, b, x, y) * _betacf(a, b, x) / a
        return lower, 1.0 - lower
    upper = _front(b, a, y, x) * _betacf(b, a, y) / b
    return 1.0 - upper, upper


def inc_beta(x: float, a: float, b: float) -> float:
    return inc_beta_pair(x, a, b)[0]


def f_cdf(x: float, d1: float, d2: float) -> float:
    return _f_pair(x, d1, d2)[0]


def f_sf(x: float, d1: float, d2: float) -> float:
    """Upper tail P(F > x) of the F(d1, d2) distribution."""
    return _f_pair(x, d1, d2)[1]


def _f_pair(x: float, d1: float, d2: float) -> tuple[float, float]:
    if d1 <= 0 or d2 <= 0:
        raise ValueError("degrees of freedom must be positive")
    if x <= 0:
        return 0.0, 1.0
    if math.isinf(x):
        return 1.0, 0.0
    denom = d1 * x + d2
    return inc_beta_pair(d1 * x / denom, d1 / 2.0, d2 / 2.0, y=d2 / denom)


def t_cdf(x: float, df: float) -> float:
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if x == 0:
        return 0.5
    if math.isinf(x):
        return 1.0 if x > 0 else 0.0
    denom = df + x * x
    # one tail = I_{df/(df+x^2)}(df/2, 1/2) / 2
    tail = 0.5 * inc_beta_pair(df / denom, df / 2.0, 0.5, y=x * x / denom)[0]
    return 1.0 - tail if x > 0 else tail


def t_sf(x: float, df: float) -> float:
    return t_cdf(-x, df)


def t_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if math.isinf(t):
        return 0.0
    denom = df + t * t
    return inc_beta_pair(df / denom, df / 2.0, 0.5, y=t * t / denom)[0]
