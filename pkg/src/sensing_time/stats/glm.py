"""Ordinary least squares with sequential (type I) sums of squares."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .special import f_sf


class RankDeficientDesign(ValueError):
    pass


class MissingCovariate(ValueError):
    pass


class DegenerateResponse(ValueError):
    pass


@dataclass(frozen=True)
class Term:
    name: str
    columns: np.ndarray  # shape (n, p_term)
    column_names: tuple[str, ...]


@dataclass(frozen=True)
class TermResult:
    name: str
    df: int
    ss: float
    F: float
    p: float


@dataclass(frozen=True)
class GlmResult:
    terms: tuple[TermResult, ...]
    coefficients: dict[str, float]
    residuals: np.ndarray
    fitted: np.ndarray
    residual_df: int
    residual_ss: float
    total_ss: float
    alpha: float

    def term(self, name: str) -> TermResult:
        for t in self.terms:
            if t.name == name:
                return t
        raise KeyError(name)

    def significant(self, name: str) -> bool:
        return self.term(name).p < self.alpha


def sequential_anova(y: Sequence[float], terms: Sequence[Term], alpha: float = 0.001) -> GlmResult:
    """Fit y on an intercept plus ``terms`` and attribute SS in listed order.

    A single Householder QR of the full design gives the effects Q'y; the
    sum of squares of a term is the squared norm of its block of effects,
    which equals the drop in residual SS when the term enters after all
    earlier ones.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    blocks = [np.ones((n, 1))] + [np.asarray(t.columns, dtype=float).reshape(n, -1) for t in terms]
    X = np.hstack(blocks)
    if not np.isfinite(X).all() or not np.isfinite(y).all():
        raise MissingCovariate("design or response contains missing values")
    p = X.shape[1]
    if n <= p:
        raise RankDeficientDesign(f"{n} observations for {p} parameters")
    q, r = np.linalg.qr(X, mode="reduced")
    diag = np.abs(np.diag(r))
    scale = np.linalg.norm(X, axis=0)
    if (diag <= 1e-10 * np.maximum(scale, 1e-300)).any():
        raise RankDeficientDesign("design matrix columns are linearly dependent")
    effects = q.T @ y
    coef = np.linalg.solve(r, effects)
    fitted = X @ coef
    resid = y - fitted
    total_ss = float(((y - y.mean()) ** 2).sum())
    if total_ss == 0.0:
        raise DegenerateResponse("response has zero variance")
    resid_df = n - p
    resid_ss = float(resid @ resid)
    ms_resid = resid_ss / resid_df

    results = []
    start = 1
    for t, block in zip(terms, blocks[1:]):
        width = block.shape[1]
        ss = float((effects[start:start + width] ** 2).sum())
        start += width
        if ms_resid > 0:
            F = (ss / width) / ms_resid
            p_val = f_sf(F, width, resid_df)
        else:
            F, p_val = math.inf, 0.0
        results.append(TermResult(t.name, width, ss, F, p_val))

    names = ["(Intercept)"] + [c for t in terms for c in t.column_names]
    return GlmResult(
        terms=tuple(results),
        coefficients=dict(zip(names, (float(c) for c in coef))),
        residuals=resid,
        fitted=fitted,
        residual_df=resid_df,
        residual_ss=resid_ss,
        total_ss=total_ss,
        alpha=alpha,
    )


def fitness_terms(
    group: Sequence[str], speed: Sequence[float], igd: Sequence[float], ttc: Sequence[float],
    levels: Sequence[str] | None = None,
) -> list[Term]:
    """Design terms: fitness, speed, IGD, TTC, fitness:IGD:TTC.

    The fitness main effect is treatment coded against the first level. In
    the three-way term the IGD:TTC margin is absent from the model, so the
    factor enters with one indicator per level (one slope per group).
    """
    group = np.asarray(group)
    levels = sorted(set(group.tolist())) if levels is None else list(levels)
    if len(levels) < 2:
        raise RankDeficientDesign("fitness factor needs at least two levels")
    cols = {}
    for name, values in (("speed", speed), ("IGD", igd), ("TTC", ttc)):
        arr = np.array([math.nan if v is None else v for v in values], dtype=float)
        if not np.isfinite(arr).all():
            raise MissingCovariate(f"{name} has missing values")
        cols[name] = arr
    indicators = np.column_stack([(group == lv).astype(float) for lv in levels])
    igd_ttc = cols["IGD"] * cols["TTC"]
    return [
        Term("fitness", indicators[:, 1:], tuple(f"fitness[{lv}]" for lv in levels[1:])),
        Term("speed", cols["speed"][:, None], ("speed",)),
        Term("IGD", cols["IGD"][:, None], ("IGD",)),
        Term("TTC", cols["TTC"][:, None], ("TTC",)),
        Term(
            "fitness:IGD:TTC",
            indicators * igd_ttc[:, None],
            tuple(f"fitness[{lv}]:IGD:TTC" for lv in levels),
        ),
    ]


def fit_glm(
    st: Sequence[float], group: Sequence[str], speed: Sequence[float], igd: Sequence[float],
    ttc: Sequence[float], alpha: float = 0.001,
) -> GlmResult:
    return sequential_anova(st, fitness_terms(group, speed, igd, ttc), alpha)
