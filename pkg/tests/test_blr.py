import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ensemble_calib.blr import (
    Dataset,
    GaussianPredictive,
    PosteriorState,
    PriorSpec,
    SamplePredictive,
    empirical_quantile_index,
    posterior_update,
    predictive,
    predictive_analytic,
    predictive_quantile,
    predictive_samples,
)
from ensemble_calib.errors import DomainError, Saturated, ShapeError
from ensemble_calib.gaussian import RngStream


def _data(n, d, seed, noise=1.0):
    rng = np.random.default_rng(seed)
    x = np.column_stack([np.ones(n), rng.standard_normal((n, d - 1))])
    beta = rng.standard_normal(d)
    return Dataset(x, x @ beta + noise * rng.standard_normal(n)), beta


def test_no_data_returns_prior():
    prior = PriorSpec([1.0, -2.0], [[2.0, 0.3], [0.3, 1.0]])
    post = posterior_update(prior, Dataset(np.empty((0, 2)), np.empty(0)), 4.0)
    np.testing.assert_array_equal(post.mean, prior.mean)
    np.testing.assert_array_equal(post.cov, prior.cov)


def test_one_dimensional_hand_update():
    # precision 1 + 1 = 2, mean (0 + 1) / 2
    post = posterior_update(PriorSpec([0.0], [[1.0]]), Dataset([[1.0]], [1.0]), 1.0)
    assert abs(post.mean[0] - 0.5) <= 1e-12
    assert abs(post.cov[0, 0] - 0.5) <= 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_flat_prior_matches_least_squares(seed):
    data, _ = _data(200, 6, seed)
    post = posterior_update(PriorSpec.isotropic(6, 0.0, 1e8), data, 1.0)
    # normal-equations oracle
    ols = np.linalg.solve(data.inputs.T @ data.inputs, data.inputs.T @ data.outputs)
    np.testing.assert_allclose(post.mean, ols, rtol=1e-4)


def test_precision_identity():
    data, _ = _data(30, 5, 3)
    prior = PriorSpec(np.arange(5.0), 2.0 * np.eye(5))
    post = posterior_update(prior, data, 4.0)
    expected = np.linalg.inv(prior.cov) + data.inputs.T @ data.inputs / 4.0
    np.testing.assert_allclose(np.linalg.inv(post.cov), expected, rtol=1e-8)


def test_shape_and_domain_errors():
    prior = PriorSpec.isotropic(3)
    with pytest.raises(ShapeError):
        posterior_update(prior, Dataset(np.ones((4, 2)), np.ones(4)), 1.0)
    with pytest.raises(DomainError):
        posterior_update(prior, Dataset(np.ones((4, 3)), np.ones(4)), 0.0)
    with pytest.raises(ShapeError):
        Dataset(np.ones((4, 3)), np.ones(5))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.integers(2, 40), st.integers(0, 2**32 - 1))
def test_sequential_update_equals_one_shot(d, n, seed):
    data, _ = _data(n, d, seed)
    prior = PriorSpec(np.linspace(-1, 1, d), 1.5 * np.eye(d))
    first, second = data.split(n // 2)
    seq = posterior_update(posterior_update(prior, first, 2.0).as_prior(), second, 2.0)
    once = posterior_update(prior, data, 2.0)
    np.testing.assert_allclose(seq.mean, once.mean, rtol=1e-8, atol=1e-10)
    np.testing.assert_allclose(seq.cov, once.cov, rtol=1e-8, atol=1e-12)


def test_predictive_analytic_examples():
    post = PosteriorState(np.array([0.5]), np.array([[0.5]]), 1.0)
    assert predictive_analytic(post, [1.0]) == pytest.approx((0.5, 1.5))
    post3 = PosteriorState(np.array([1.0, 2.0, 3.0]), np.eye(3), 2.5)
    assert predictive_analytic(post3, np.zeros(3)) == (0.0, 2.5)
    point = PosteriorState(np.array([1.0, 2.0]), 1e-300 * np.eye(2), 3.0)
    assert predictive_analytic(point, [4.0, 5.0])[1] == 3.0
    with pytest.raises(ShapeError):
        predictive_analytic(post3, [1.0, 2.0])


def test_predictive_batch_matches_single():
    data, _ = _data(30, 4, 1)
    post = posterior_update(PriorSpec.isotropic(4, 1.0, 2.0), data, 4.0)
    m, v = predictive_analytic(post, data.inputs[:5])
    for k in range(5):
        mk, vk = predictive_analytic(post, data.inputs[k])
        assert mk == pytest.approx(m[k], rel=1e-12)
        assert vk == pytest.approx(v[k], rel=1e-12)


def test_predictive_samples_converge_to_analytic():
    data, _ = _data(30, 5, 7)
    post = posterior_update(PriorSpec.isotropic(5, 0.0, 2.0), data, 4.0)
    x = np.array([1.0, 0.3, -1.2, 0.7, 2.0])
    s = predictive_samples(post, x, 100_000, RngStream(3))
    m, v = predictive_analytic(post, x)
    assert np.all(np.diff(s) >= 0)
    assert s.mean() == pytest.approx(m, abs=0.02 * np.sqrt(v))
    assert s.var() == pytest.approx(v, rel=0.02)


def test_predictive_samples_deterministic_and_degenerate():
    post = PosteriorState(np.array([1.0, 2.0]), 1e-16 * np.eye(2), 1e-16)
    a = predictive_samples(post, [1.0, 1.0], 500, RngStream(9))
    b = predictive_samples(post, [1.0, 1.0], 500, RngStream(9))
    assert a.tobytes() == b.tobytes()
    np.testing.assert_allclose(a, 3.0, atol=1e-6)
    with pytest.raises(DomainError):
        predictive_samples(post, [1.0, 1.0], 1, RngStream(9))


def test_predictive_quantile_analytic():
    pred = GaussianPredictive([2.0], [9.0])
    assert predictive_quantile(pred, 0.5) == 2.0
    std = GaussianPredictive([0.0], [1.0])
    assert predictive_quantile(std, 0.975) == pytest.approx(1.959963985, abs=1e-9)
    with pytest.raises(DomainError):
        predictive_quantile(std, 1.0)


def test_predictive_quantile_empirical_saturation():
    pred = SamplePredictive(np.arange(100.0))
    with pytest.raises(Saturated):
        predictive_quantile(pred, 1e-4)
    with pytest.raises(Saturated):
        predictive_quantile(pred, 1 - 1e-4)
    assert predictive_quantile(pred, 0.01) == 0.0
    assert predictive_quantile(pred, 0.99) == 99.0


def test_empirical_index_is_robust_to_rounding():
    # 0.29 * 100 evaluates to 28.999999999999996 in floating point
    assert int(empirical_quantile_index(0.29, 100)) == 28
    assert int(empirical_quantile_index(1 - 0.29, 100)) == 100 - 29


def test_variance_grows_with_prior_covariance():
    data, _ = _data(30, 6, 2)
    x = np.random.default_rng(0).standard_normal((50, 6))
    base = PriorSpec.isotropic(6, 0.0, 2.0)
    wider = PriorSpec(base.mean, base.cov + 0.5 * np.eye(6))
    _, v0 = predictive_analytic(posterior_update(base, data, 4.0), x)
    _, v1 = predictive_analytic(posterior_update(wider, data, 4.0), x)
    assert np.all(v1 >= v0 - 1e-12)


def test_variance_does_not_depend_on_prior_mean():
    data, _ = _data(30, 6, 4)
    x = np.random.default_rng(1).standard_normal((20, 6))
    variances = [
        predictive_analytic(posterior_update(PriorSpec.isotropic(6, i, 2.0), data, 4.0), x)[1]
        for i in (-10, 0, 7)
    ]
    assert variances[0].tobytes() == variances[1].tobytes() == variances[2].tobytes()


def test_empirical_quantiles_agree_with_analytic():
    data, _ = _data(30, 4, 8)
    post = posterior_update(PriorSpec.isotropic(4, 1.0, 2.0), data, 4.0)
    x = np.random.default_rng(2).standard_normal((3, 4))
    exact = predictive(post, x, "analytic")
    mc = predictive(post, x, "sampling", 100_000, RngStream(4))
    for p in (0.05, 0.25, 0.5, 0.75, 0.95):
        np.testing.assert_array_less(np.abs(mc.quantile(p) - exact.quantile(p)), 0.02 * np.sqrt(exact.var))
