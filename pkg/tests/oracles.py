"""Independent reference computations used by the test suite.

Everything here is written from textbook formulas in high precision
(mpmath) or by simulation, and shares no code with the package.
"""

from __future__ import annotations

import mpmath as mp
import numpy as np

mp.mp.dps = 40


def _mpf_list(values):
    return [mp.mpf(float(v)) for v in values]


def inc_beta(x, a, b):
    return float(mp.betainc(mp.mpf(a), mp.mpf(b), 0, mp.mpf(x), regularized=True))


def f_sf(F, d1, d2):
    F, d1, d2 = mp.mpf(F), mp.mpf(d1), mp.mpf(d2)
    return float(mp.betainc(d2 / 2, d1 / 2, 0, d2 / (d2 + d1 * F), regularized=True))


def welch_anova(groups):
    """Welch's heteroscedastic one-way ANOVA, returns (F, df1, df2, p)."""
    k = len(groups)
    ns, means, vars_ = [], [], []
    for g in groups:
        xs = _mpf_list(g)
        n = len(xs)
        m = mp.fsum(xs) / n
        ns.append(mp.mpf(n))
        means.append(m)
        vars_.append(mp.fsum((x - m) ** 2 for x in xs) / (n - 1))
    w = [n / v for n, v in zip(ns, vars_)]
    sw = mp.fsum(w)
    grand = mp.fsum(wi * mi for wi, mi in zip(w, means)) / sw
    a = mp.fsum(wi * (mi - grand) ** 2 for wi, mi in zip(w, means)) / (k - 1)
    lam = mp.fsum((1 - wi / sw) ** 2 / (ni - 1) for wi, ni in zip(w, ns))
    b = 1 + 2 * (k - 2) * lam / (k ** 2 - 1)
    F = a / b
    df1 = mp.mpf(k - 1)
    df2 = (k ** 2 - 1) / (3 * lam)
    p = mp.betainc(df2 / 2, df1 / 2, 0, df2 / (df2 + df1 * F), regularized=True)
    return float(F), float(df1), float(df2), float(p)


def _ols_rss(X, y):
    """Normal-equation least squares in high precision; returns (coef, rss)."""
    Xm = mp.matrix(X)
    ym = mp.matrix(y)
    XtX = Xm.T * Xm
    Xty = Xm.T * ym
    beta = mp.lu_solve(XtX, Xty)
    resid = ym - Xm * beta
    rss = mp.fsum(r ** 2 for r in resid)
    return [beta[i] for i in range(beta.rows)], rss


def sequential_ss(y, blocks):
    """Type I sums of squares: RSS drop as each block of columns is appended.

    ``blocks`` is a list of 2-D arrays (n x p_i); an intercept is prepended.
    Returns (coefficients of the full model, list of SS, residual SS).
    """
    y = _mpf_list(y)
    n = len(y)
    cols = [[mp.mpf(1)] * n]
    prev_rss = mp.fsum((v - mp.fsum(y) / n) ** 2 for v in y)
    ss = []
    coef = None
    for block in blocks:
        block = np.asarray(block, dtype=float).reshape(n, -1)
        for j in range(block.shape[1]):
            cols.append(_mpf_list(block[:, j]))
        X = [[cols[c][i] for c in range(len(cols))] for i in range(n)]
        coef, rss = _ols_rss(X, y)
        ss.append(prev_rss - rss)
        prev_rss = rss
    return [float(c) for c in coef], [float(s) for s in ss], float(prev_rss)


def pearson(x, y):
    xs, ys = _mpf_list(x), _mpf_list(y)
    n = len(xs)
    mx, my = mp.fsum(xs) / n, mp.fsum(ys) / n
    sxy = mp.fsum((a - mx) * (b - my) for a, b in zip(xs, ys))
    sxx = mp.fsum((a - mx) ** 2 for a in xs)
    syy = mp.fsum((b - my) ** 2 for b in ys)
    r = sxy / mp.sqrt(sxx * syy)
    df = n - 2
    if r ** 2 >= 1:
        return float(r), 0.0
    t = r * mp.sqrt(df / (1 - r ** 2))
    p = mp.betainc(mp.mpf(df) / 2, mp.mpf(1) / 2, 0, df / (df + t ** 2), regularized=True)
    return float(r), float(p)


def t_two_sided(t, df):
    t, df = mp.mpf(t), mp.mpf(df)
    return float(mp.betainc(df / 2, mp.mpf(1) / 2, 0, df / (df + t ** 2), regularized=True))


def quantile7(values, q):
    """Linear interpolation between order statistics at position 1 + q(n-1)."""
    xs = sorted(_mpf_list(values))
    h = (len(xs) - 1) * mp.mpf(q)
    lo = int(mp.floor(h))
    hi = min(lo + 1, len(xs) - 1)
    return float(xs[lo] + (h - lo) * (xs[hi] - xs[lo]))


def mc_studentized_range_cdf(q, k, df, draws=1_000_000, seed=12345, chunk=250_000):
    """Fraction of simulated studentized ranges below ``q``."""
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < draws:
        m = min(chunk, draws - done)
        z = rng.standard_normal((m, k))
        s = np.sqrt(rng.chisquare(df, m) / df)
        hits += int(((z.max(axis=1) - z.min(axis=1)) / s < q).sum())
        done += m
    return hits / draws


def studentized_range_cdf_k2(q, df):
    """For two means the range is |Z1 - Z2|, so P(Q < q) = P(|T| < q / sqrt 2)."""
    return 1.0 - t_two_sided(q / np.sqrt(2.0), df)
