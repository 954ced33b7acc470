import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from ensemble_calib.errors import DomainError, NotPositiveDefinite
from ensemble_calib.gaussian import RngStream, cholesky, mvn_sample, normal_cdf, normal_quantile


def _pdf(x):
    return math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)


def _cdf_quadrature(x):
    # independent of the erf-based implementation
    if x < 0:
        return quad(_pdf, -np.inf, x, epsabs=1e-15, epsrel=1e-13)[0]
    return 0.5 + quad(_pdf, 0.0, x, epsabs=1e-15, epsrel=1e-13)[0]


def test_cholesky_identity():
    np.testing.assert_array_equal(cholesky(np.eye(3)), np.eye(3))


def test_cholesky_hand_factorization():
    a = np.array([[4.0, 2.0], [2.0, 3.0]])
    low = cholesky(a)
    np.testing.assert_allclose(low, [[2.0, 0.0], [1.0, math.sqrt(2.0)]], rtol=1e-14)
    np.testing.assert_allclose(low @ low.T, a, rtol=1e-14)


def test_cholesky_indefinite_reports_pivot():
    with pytest.raises(NotPositiveDefinite) as exc:
        cholesky([[1.0, 2.0], [2.0, 1.0]])
    assert exc.value.pivot == 1


def test_cholesky_symmetrizes_input():
    a = np.array([[4.0, 2.0 + 1e-13], [2.0, 3.0]])
    low = cholesky(a)
    np.testing.assert_allclose(low @ low.T, 0.5 * (a + a.T), rtol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 25), st.integers(0, 2**32 - 1))
def test_cholesky_reconstructs_random_spd(d, seed):
    rng = np.random.default_rng(seed)
    b = rng.standard_normal((d, d))
    a = b @ b.T + 0.1 * np.eye(d)
    low = cholesky(a)
    assert np.allclose(np.triu(low, 1), 0.0)
    assert np.linalg.norm(low @ low.T - a) / np.linalg.norm(a) <= 1e-8


def test_normal_cdf_values():
    assert normal_cdf(0.0) == 0.5
    assert normal_cdf(1.959963985) == pytest.approx(_cdf_quadrature(1.959963985), abs=1e-12)
    assert normal_cdf(1.959963985) == pytest.approx(0.975, abs=1e-9)


def test_normal_cdf_far_tail_matches_asymptotic_series():
    x = -8.0
    series = _pdf(x) / abs(x) * (1 - 1 / x**2 + 3 / x**4 - 15 / x**6 + 105 / x**8 - 945 / x**10)
    assert series == pytest.approx(6.22e-16, rel=1e-3)
    assert normal_cdf(x) == pytest.approx(series, rel=1e-4)


def test_normal_cdf_monotone():
    x = np.linspace(-10, 10, 2001)
    assert np.all(np.diff(normal_cdf(x)) >= 0)


def test_normal_quantile_values():
    assert normal_quantile(0.5) == 0.0
    # bisection on the quadrature cdf
    lo, hi = 0.0, 5.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if _cdf_quadrature(mid) < 0.975 else (lo, mid)
    assert normal_quantile(0.975) == pytest.approx(0.5 * (lo + hi), abs=1e-9)
    assert normal_quantile(0.975) == pytest.approx(1.959963985, abs=1e-9)


def test_normal_quantile_extreme_tail():
    z = normal_quantile(1e-300)
    assert np.isfinite(z) and z < -30


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
def test_normal_quantile_domain(p):
    with pytest.raises(DomainError):
        normal_quantile(p)


@settings(max_examples=200, deadline=None)
@given(st.floats(-6.0, 6.0))
def test_quantile_inverts_cdf(x):
    assert normal_quantile(normal_cdf(x)) == pytest.approx(x, abs=1e-8)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-12, 1 - 1e-12))
def test_cdf_inverts_quantile(p):
    assert normal_cdf(normal_quantile(p)) == pytest.approx(p, abs=1e-10)


def test_mvn_sample_covariance_converges():
    x = mvn_sample(np.zeros(2), np.eye(2), 50_000, RngStream(1))
    assert x.shape == (50_000, 2)
    np.testing.assert_allclose(np.cov(x.T), np.eye(2), atol=0.05)
    np.testing.assert_allclose(x.mean(axis=0), 0.0, atol=0.02)


def test_mvn_sample_degenerate_spread():
    eps = 1e-12
    mean = np.array([1.0, -2.0, 3.0])
    x = mvn_sample(mean, eps * np.eye(3), 1000, RngStream(2))
    assert np.max(np.abs(x - mean)) < 10 * math.sqrt(eps)


def test_mvn_sample_deterministic():
    cov = np.array([[2.0, 0.5], [0.5, 1.0]])
    a = mvn_sample([0.0, 1.0], cov, 100, RngStream(5, (1, -3)))
    b = mvn_sample([0.0, 1.0], cov, 100, RngStream(5, (1, -3)))
    assert a.tobytes() == b.tobytes()


def test_mvn_sample_propagates_not_positive_definite():
    with pytest.raises(NotPositiveDefinite):
        mvn_sample([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]], 3, RngStream(0))


def test_rng_streams_are_distinct_and_reproducible():
    root = RngStream(11)
    a = root.spawn(0, 5).generator().standard_normal(4)
    b = root.spawn(0, -5).generator().standard_normal(4)
    c = RngStream(11).spawn(0).spawn(5).generator().standard_normal(4)
    assert not np.array_equal(a, b)
    assert a.tobytes() == c.tobytes()
