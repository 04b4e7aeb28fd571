import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from sensing_time.stats import (
    DegenerateResponse,
    MissingCovariate,
    RankDeficientDesign,
    Term,
    fit_glm,
    fitness_terms,
    sequential_anova,
)

GROUPS = ["fit", "cond_fit", "unfit"] * 4


def fixture(seed=0, n=12):
    rng = np.random.default_rng(seed)
    group = (["fit", "cond_fit", "unfit"] * n)[:n]
    speed = rng.uniform(3, 47, n).round(2)
    igd = rng.integers(5, 260, n).astype(float)
    ttc = rng.uniform(0.5, 8, n).round(3)
    base = {"fit": 160, "cond_fit": 290, "unfit": 250}
    st_ms = np.array([base[g] for g in group]) + 0.8 * speed - 0.1 * igd + 5 * ttc + rng.normal(0, 30, n)
    return st_ms.round(), group, speed, igd, ttc


def test_twelve_row_fixture_vs_normal_equations():
    y, group, speed, igd, ttc = fixture()
    res = fit_glm(y, group, speed, igd, ttc)
    terms = fitness_terms(group, speed, igd, ttc)
    coef, ss, rss = oracles.sequential_ss(y, [t.columns for t in terms])
    assert list(res.coefficients.values()) == pytest.approx(coef, rel=1e-9)
    assert [t.ss for t in res.terms] == pytest.approx(ss, rel=1e-9)
    assert res.residual_ss == pytest.approx(rss, rel=1e-9)
    assert [t.name for t in res.terms] == ["fitness", "speed", "IGD", "TTC", "fitness:IGD:TTC"]
    assert [t.df for t in res.terms] == [2, 1, 1, 1, 3]
    assert res.residual_df == 12 - 9


def test_reference_level_is_cond_fit():
    y, group, speed, igd, ttc = fixture(n=30)
    res = fit_glm(y, group, speed, igd, ttc)
    assert "fitness[fit]" in res.coefficients and "fitness[unfit]" in res.coefficients
    assert "fitness[cond_fit]" not in res.coefficients


def test_f_and_p_follow_from_ss():
    y, group, speed, igd, ttc = fixture(seed=4, n=40)
    res = fit_glm(y, group, speed, igd, ttc)
    ms = res.residual_ss / res.residual_df
    for t in res.terms:
        assert t.F == pytest.approx(t.ss / t.df / ms, rel=1e-12)
        assert oracles.f_sf(t.F, t.df, res.residual_df) == pytest.approx(t.p, rel=1e-9, abs=1e-300)


def test_errors():
    y, group, speed, igd, ttc = fixture(n=20)
    with pytest.raises(DegenerateResponse):
        fit_glm(np.full(20, 200.0), group, speed, igd, ttc)
    with pytest.raises(MissingCovariate):
        fit_glm(y, group, speed, list(igd[:-1]) + [None], ttc)
    with pytest.raises(RankDeficientDesign):
        fit_glm(y, group, speed, igd, speed * 2)
    with pytest.raises(RankDeficientDesign):
        fit_glm(y[:8], group[:8], speed[:8], igd[:8], ttc[:8])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(15, 60))
def test_ss_decomposition_and_orthogonality(seed, n):
    y, group, speed, igd, ttc = fixture(seed, n)
    res = fit_glm(y, group, speed, igd, ttc)
    assert sum(t.ss for t in res.terms) + res.residual_ss == pytest.approx(res.total_ss, rel=1e-9)
    X = np.hstack([np.ones((n, 1))] + [t.columns for t in fitness_terms(group, speed, igd, ttc)])
    inner = X.T @ res.residuals
    scale = np.linalg.norm(X, axis=0) * np.linalg.norm(y)
    assert np.all(np.abs(inner) <= 1e-9 * scale)


def test_generic_terms_match_oracle():
    rng = np.random.default_rng(9)
    x = rng.normal(size=(25, 3))
    y = x @ [1.0, -2.0, 0.5] + rng.normal(size=25)
    terms = [Term("a", x[:, :1], ("a",)), Term("bc", x[:, 1:], ("b", "c"))]
    res = sequential_anova(y, terms)
    _, ss, _ = oracles.sequential_ss(y, [x[:, :1], x[:, 1:]])
    assert [t.ss for t in res.terms] == pytest.approx(ss, rel=1e-9)
