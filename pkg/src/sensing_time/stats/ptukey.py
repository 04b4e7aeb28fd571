"""Distribution of the studentized range by adaptive Gauss-Legendre quadrature.

P(Q <= q; k, df) = int_0^inf f_s(s) W(q s) ds, where s is the pooled standard
deviation estimate (chi_df / sqrt(df)) and

    W(w) = k int phi(z) [Phi(z + w) - Phi(z)]^(k-1) dz

is the probability that the range of k standard normals is at most w.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr

from .special import NonConvergence

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(16)
_Z_LIMIT = 8.5
_DF_LIMIT = 1e7
_MAX_LEVELS = 40


def adaptive_gauss_legendre(func, a: float, b: float, tol: float, n_init: int = 8):
    """Integrate a vectorised ``func`` over [a, b] by panel bisection.

    ``func`` maps a 1-d array of abscissae to an array whose last axis runs
    over them; leading axes are integrated independently. A panel is
    accepted once the 16-point rule on it and on its two halves agree to
    within its share of ``tol`` (worst case over the leading axes).
    """
    edges = np.linspace(a, b, n_init + 1)
    lo, hi = edges[:-1], edges[1:]
    total = None
    span = b - a
    for _ in range(_MAX_LEVELS):
        mid = 0.5 * (lo + hi)
        whole = _panel_rule(func, lo, hi)
        halves = _panel_rule(func, lo, mid) + _panel_rule(func, mid, hi)
        err = np.abs(whole - halves)
        if err.ndim > 1:
            err = err.reshape(-1, err.shape[-1]).max(axis=0)
        ok = err <= tol * (hi - lo) / span
        done = halves[..., ok].sum(axis=-1)
        total = done if total is None else total + done
        if ok.all():
            return total
        lo, hi = np.concatenate([lo[~ok], mid[~ok]]), np.concatenate([mid[~ok], hi[~ok]])
    raise NonConvergence("adaptive quadrature did not converge", float(err.max()))


def _panel_rule(func, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    half = 0.5 * (hi - lo)
    x = (0.5 * (hi + lo))[:, None] + half[:, None] * _NODES[None, :]
    vals = func(x.ravel())
    vals = vals.reshape(vals.shape[:-1] + x.shape)
    return (vals * _WEIGHTS).sum(axis=-1) * half


def range_cdf(w: np.ndarray, k: int, tol: float = 1e-10) -> np.ndarray:
    """P(range of k iid standard normals <= w), vectorised over ``w``."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    out = np.zeros_like(w)
    pos = w > 0
    if not pos.any():
        return out
    wp = w[pos][:, None]

    def integrand(z):
        base = ndtr(z)
        diff = np.clip(ndtr(z[None, :] + wp) - base[None, :], 0.0, 1.0)
        return np.exp(-0.5 * z * z)[None, :] / math.sqrt(2 * math.pi) * diff ** (k - 1)

    out[pos] = k * adaptive_gauss_legendre(integrand, -_Z_LIMIT, _Z_LIMIT, tol / k)
    return np.minimum(out, 1.0)


@lru_cache(maxsize=512)
def _scale_window(df: float) -> tuple[float, float, float]:
    """Support of the chi_df / sqrt(df) density down to exp(-45) of its peak."""
    log_c = 0.5 * df * math.log(df) - math.lgamma(0.5 * df) - (0.5 * df - 1.0) * math.log(2.0)
    mode = math.sqrt(max(df - 1.0, 0.0) / df)
    width = 12.0 / math.sqrt(df)
    grid = np.linspace(max(0.0, mode - width), mode + width + 1.0, 4001)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_s = np.log(grid)
        power = np.where(grid > 0, (df - 1.0) * log_s, 0.0 if df == 1.0 else -np.inf)
    logf = log_c + power - 0.5 * df * grid * grid
    keep = np.nonzero(logf > logf.max() - 45.0)[0]
    step = grid[1] - grid[0]
    lo = max(0.0, grid[keep[0]] - step)
    hi = grid[keep[-1]] + step
    return lo, hi, log_c


def studentized_range_cdf(q: float, k: int, df: float, tol: float = 1e-8) -> float:
    """CDF of the studentized range for ``k`` means and ``df`` error degrees of freedom."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if df < 1:
        raise ValueError("df must be at least 1")
    if q <= 0 or math.isnan(q):
        return 0.0
    if math.isinf(q):
        return 1.0
    if df > _DF_LIMIT:
        return float(range_cdf(np.array([q]), k, tol)[0])
    lo, hi, log_c = _scale_window(float(df))

    def integrand(s):
        with np.errstate(divide="ignore"):
            dens = np.exp(log_c + (df - 1.0) * np.log(s) - 0.5 * df * s * s)
        return dens * range_cdf(q * s, k, tol * 1e-2)

    p = float(adaptive_gauss_legendre(integrand, lo, hi, tol))
    return min(max(p, 0.0), 1.0)


def studentized_range_sf(q: float, k: int, df: float, tol: float = 1e-8) -> float:
    return 1.0 - studentized_range_cdf(q, k, df, tol)


@lru_cache(maxsize=256)
def studentized_range_ppf(p: float, k: int, df: float) -> float:
    """Quantile of the studentized range, by root-finding on the CDF."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    hi = 4.0
    while studentized_range_cdf(hi, k, df) < p:
        hi *= 2.0
    return brentq(lambda q: studentized_range_cdf(q, k, df) - p, 0.0, hi, xtol=1e-10, rtol=1e-12)
