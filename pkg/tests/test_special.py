import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from sensing_time.stats import f_cdf, f_sf, inc_beta, inc_beta_pair, t_cdf, t_sf, t_two_sided


@pytest.mark.parametrize("x", [0.0, 0.1, 0.37, 0.5, 0.999, 1.0])
def test_uniform_case(x):
    assert inc_beta(x, 1, 1) == pytest.approx(x, abs=1e-15)


@pytest.mark.parametrize("a,b", [(0.5, 0.5), (2, 30), (300, 0.5), (1e-3, 4)])
def test_total_mass(a, b):
    assert inc_beta(1.0, a, b) == 1.0
    assert inc_beta(0.0, a, b) == 0.0


@pytest.mark.parametrize("df", [1, 2.5, 10, 1e4])
def test_t_symmetry(df):
    assert t_cdf(0.0, df) == 0.5
    assert t_cdf(1.3, df) + t_cdf(-1.3, df) == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-4, 1 - 1e-4), st.floats(0.05, 500), st.floats(0.05, 500))
def test_inc_beta_vs_mpmath(x, a, b):
    ref = oracles.inc_beta(x, a, b)
    lo, hi = inc_beta_pair(x, a, b)
    assert lo == pytest.approx(ref, rel=1e-11, abs=1e-300)
    assert lo + hi == pytest.approx(1.0, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 200), st.floats(0.5, 60), st.floats(0.5, 300))
def test_f_tail_vs_mpmath(F, d1, d2):
    ref = oracles.f_sf(F, d1, d2)
    assert f_sf(F, d1, d2) == pytest.approx(ref, rel=1e-10, abs=1e-300)
    assert f_cdf(F, d1, d2) == pytest.approx(1 - ref, abs=1e-13)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 40), st.floats(0.5, 1000))
def test_t_tail_vs_mpmath(t, df):
    ref = oracles.t_two_sided(t, df)
    assert t_two_sided(t, df) == pytest.approx(ref, rel=1e-10, abs=1e-300)
    assert t_sf(t, df) == pytest.approx(ref / 2, rel=1e-10, abs=1e-300)


def test_deep_tail_keeps_relative_accuracy():
    assert f_sf(400.0, 2, 50) == pytest.approx(oracles.f_sf(400.0, 2, 50), rel=1e-10)
    assert math.isfinite(f_sf(1e6, 3, 3))
