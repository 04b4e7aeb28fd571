import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

import oracles
from sensing_time.stats import studentized_range_cdf, studentized_range_ppf, studentized_range_sf


def test_endpoints():
    assert studentized_range_cdf(0.0, 3, 10) == 0.0
    assert studentized_range_cdf(-1.0, 3, 10) == 0.0
    assert studentized_range_cdf(np.inf, 3, 10) == 1.0
    assert studentized_range_cdf(60.0, 3, 10) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("q", [0.3, 1.0, 2.2, 3.5, 6.0])
@pytest.mark.parametrize("df", [1, 3, 17.5, 50, 400])
def test_two_means_reduce_to_t(q, df):
    assert studentized_range_cdf(q, 2, df) == pytest.approx(oracles.studentized_range_cdf_k2(q, df), abs=1e-8)


@pytest.mark.parametrize("q,k,df", [
    (3.41, 3, 53), (1.0, 3, 50), (2.5, 4, 12), (4.5, 5, 30), (0.7, 3, 5), (5.0, 10, 100), (3.0, 3, 2),
])
def test_agrees_with_scipy(q, k, df):
    assert studentized_range_cdf(q, k, df) == pytest.approx(sps.studentized_range.cdf(q, k, df), abs=1e-8)


def test_monte_carlo_k3_df50():
    for q in (1.5, 2.5, 3.4):
        mc = oracles.mc_studentized_range_cdf(q, 3, 50, draws=200_000, seed=7)
        assert abs(studentized_range_cdf(q, 3, 50) - mc) < 4e-3


def test_ppf_inverts_cdf():
    q = studentized_range_ppf(0.95, 3, 53)
    assert q == pytest.approx(sps.studentized_range.ppf(0.95, 3, 53), rel=1e-8)
    assert studentized_range_cdf(q, 3, 53) == pytest.approx(0.95, abs=1e-9)
    assert studentized_range_sf(q, 3, 53) == pytest.approx(0.05, abs=1e-9)


def test_large_df_approaches_normal_range():
    assert studentized_range_cdf(3.3, 3, 1e9) == pytest.approx(studentized_range_cdf(3.3, 3, 1e6), abs=1e-5)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 8.0), st.floats(0.0, 8.0), st.integers(2, 6), st.floats(1.0, 200.0))
def test_monotone_and_bounded(q1, q2, k, df):
    lo, hi = sorted((q1, q2))
    a, b = studentized_range_cdf(lo, k, df), studentized_range_cdf(hi, k, df)
    assert 0.0 <= a <= b + 1e-10 <= 1.0 + 1e-10
