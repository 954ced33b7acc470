"""Conjugate Bayesian linear regression with known noise variance.

The posterior over the weights is the exact Gaussian obtained from a Gaussian
prior and Gaussian likelihood. It is treated as a weighted ensemble of linear
models: predictive distributions integrate the likelihood against it, either
in closed form (``GaussianPredictive``) or by drawing ensemble members and
noise (``SamplePredictive``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.linalg import cho_solve

from .errors import DomainError, Saturated, ShapeError
from .gaussian import as_generator, cholesky, mvn_sample, normal_quantile

# slack for floor(p * S) so that e.g. 0.29 * 100 lands on 29
_RANK_TOL = 1e-9


@dataclass(frozen=True)
class PriorSpec:
    """Gaussian prior N(mean, cov) over the regression weights."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise ShapeError(f"prior mean has {mean.size} entries, cov has shape {cov.shape}")
        cholesky(cov)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @classmethod
    def isotropic(cls, dim: int, mean: float = 0.0, scale: float = 1.0) -> "PriorSpec":
        """N(mean * 1, scale * I) in ``dim`` dimensions."""
        return cls(np.full(dim, float(mean)), float(scale) * np.eye(dim))

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class Dataset:
    """Design matrix ``inputs`` (n, d) and response vector ``outputs`` (n,)."""

    inputs: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.inputs, dtype=float)
        y = np.asarray(self.outputs, dtype=float).reshape(-1)
        if x.ndim != 2 or x.shape[0] != y.size:
            raise ShapeError(f"inputs {x.shape} do not match outputs ({y.size},)")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DomainError("dataset contains non-finite values")
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "outputs", y)

    def __len__(self) -> int:
        return self.outputs.size

    @property
    def dim(self) -> int:
        return self.inputs.shape[1]

    def split(self, index: int) -> tuple["Dataset", "Dataset"]:
        return (
            Dataset(self.inputs[:index], self.outputs[:index]),
            Dataset(self.inputs[index:], self.outputs[index:]),
        )


@dataclass(frozen=True)
class PosteriorState:
    """Gaussian posterior N(mean, cov) over weights, with the known noise variance."""

    mean: np.ndarray
    cov: np.ndarray
    noise_var: float

    @property
    def dim(self) -> int:
        return self.mean.size

    def as_prior(self) -> PriorSpec:
        return PriorSpec(self.mean, self.cov)


def posterior_update(prior: PriorSpec, data: Dataset, noise_var: float) -> PosteriorState:
    """Exact conjugate update.

    Computes ``cov_n = (cov_0^-1 + X'X / s2)^-1`` and
    ``mean_n = cov_n (cov_0^-1 mean_0 + X'y / s2)`` through Cholesky solves on
    the precision matrices. With no data the prior is returned unchanged.
    """
    if not noise_var > 0:
        raise DomainError(f"noise variance must be positive, got {noise_var}")
    if data.dim != prior.dim:
        raise ShapeError(f"data has {data.dim} columns, prior has dimension {prior.dim}")
    if len(data) == 0:
        return PosteriorState(prior.mean.copy(), prior.cov.copy(), float(noise_var))

    eye = np.eye(prior.dim)
    prior_chol = (cholesky(prior.cov), True)
    prior_prec = cho_solve(prior_chol, eye)
    x, y = data.inputs, data.outputs
    prec = prior_prec + (x.T @ x) / noise_var
    prec = 0.5 * (prec + prec.T)
    post_chol = (cholesky(prec), True)
    rhs = cho_solve(prior_chol, prior.mean) + (x.T @ y) / noise_var
    mean = cho_solve(post_chol, rhs)
    cov = cho_solve(post_chol, eye)
    cov = 0.5 * (cov + cov.T)
    return PosteriorState(mean, cov, float(noise_var))


def _as_rows(post: PosteriorState, x_star) -> tuple[np.ndarray, bool]:
    x = np.asarray(x_star, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.ndim != 2 or x.shape[1] != post.dim:
        raise ShapeError(f"inputs of shape {np.shape(x_star)} do not match dimension {post.dim}")
    return x, single


def predictive_analytic(post: PosteriorState, x_star):
    """Predictive mean ``x'mean_n`` and variance ``s2 + x'cov_n x``.

    Returns floats for a single input vector, arrays for a matrix of inputs.
    """
    x, single = _as_rows(post, x_star)
    mean = x @ post.mean
    var = post.noise_var + np.einsum("ij,jk,ik->i", x, post.cov, x)
    var = np.maximum(var, post.noise_var)
    if single:
        return float(mean[0]), float(var[0])
    return mean, var


def sample_ensemble(post: PosteriorState, s: int, rng) -> np.ndarray:
    """Draw ``s`` ensemble members (weight vectors) from the posterior, shape ``(s, d)``."""
    if s < 2:
        raise DomainError(f"need at least 2 samples, got {s}")
    return mvn_sample(post.mean, post.cov, s, rng)


def ensemble_draws(post: PosteriorState, betas: np.ndarray, x_star, rng) -> np.ndarray:
    """Predictive draws ``x' beta_j + noise_j`` for every input row and member ``j``."""
    x, _ = _as_rows(post, x_star)
    out = x @ betas.T
    out += np.sqrt(post.noise_var) * as_generator(rng).standard_normal(out.shape)
    return out


def draw_predictive(post: PosteriorState, x_star, s: int, rng, sort: bool = True) -> np.ndarray:
    """Monte Carlo predictive draws, shape ``(k, s)`` for ``k`` inputs.

    Column ``j`` uses one ensemble member ``beta_j`` drawn from the posterior
    (shared across inputs) plus independent N(0, s2) noise.
    """
    gen = as_generator(rng)
    out = ensemble_draws(post, sample_ensemble(post, s, gen), x_star, gen)
    if sort:
        out.sort(axis=1)
    return out


def predictive_samples(post: PosteriorState, x_star, s: int, rng) -> np.ndarray:
    """Sorted predictive samples; 1-d for a single input, ``(k, s)`` otherwise."""
    single = np.ndim(x_star) == 1
    out = draw_predictive(post, x_star, s, rng)
    return out[0] if single else out


def _check_p(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(~(p > 0.0) | ~(p < 1.0)):
        raise DomainError(f"probability must lie in (0, 1), got {p}")
    return p


def lower_rank(p, n_samples: int) -> np.ndarray:
    """Number ``k`` of samples at or below the lower bound at level ``p``.

    The lower bound is the ``k``-th smallest sample with ``k = floor(p * S)``,
    the largest sample value whose empirical cdf does not exceed ``p``.
    ``k == 0`` means the level is not resolvable.
    """
    return np.floor(np.asarray(p, dtype=float) * n_samples + _RANK_TOL).astype(np.int64)


def empirical_quantile_index(p, n_samples: int, side: str | None = None) -> np.ndarray:
    """Zero-based order-statistic index for level ``p``, or -1 when saturated.

    A lower bound at level ``p`` is the ``floor(p S)``-th smallest sample (the
    largest sample whose empirical cdf is at most ``p``). An upper bound
    mirrors it: the ``floor((1 - p) S)``-th largest sample, the smallest one
    whose upper-tail mass is at most ``1 - p``. Without ``side`` levels up to
    one half are read as lower bounds and the rest as upper bounds.
    """
    p = np.asarray(p, dtype=float)
    if side is None:
        upper = p > 0.5
    elif side in ("lower", "upper"):
        upper = np.full(p.shape, side == "upper")
    else:
        raise DomainError(f"side must be 'lower' or 'upper', got {side!r}")
    k = lower_rank(np.where(upper, 1.0 - p, p), n_samples)
    idx = np.where(upper, n_samples - k, k - 1)
    return np.where(k >= 1, idx, -1)


class GaussianPredictive:
    """Closed-form Gaussian predictives for a batch of inputs."""

    mode = "analytic"

    def __init__(self, mean, var):
        self.mean = np.atleast_1d(np.asarray(mean, dtype=float))
        self.var = np.atleast_1d(np.asarray(var, dtype=float))
        if self.mean.shape != self.var.shape or self.mean.ndim != 1:
            raise ShapeError("mean and var must be 1-d arrays of equal length")
        if np.any(self.var <= 0):
            raise DomainError("predictive variances must be positive")

    def __len__(self) -> int:
        return self.mean.size

    def __getitem__(self, item) -> "GaussianPredictive":
        return GaussianPredictive(np.atleast_1d(self.mean[item]), np.atleast_1d(self.var[item]))

    def quantile(self, p, side: str | None = None) -> np.ndarray:
        """Quantiles at level(s) ``p``; ``p`` broadcasts against the batch axis.

        ``side`` only matters for sample-based predictives.
        """
        z = normal_quantile(_check_p(p))
        return self.mean + np.sqrt(self.var) * z

    def resolvable(self, p, side: str | None = None) -> np.ndarray:
        return np.ones(np.shape(p), dtype=bool)


class SamplePredictive:
    """Empirical predictives from sorted samples, one row per input."""

    mode = "empirical"

    def __init__(self, samples, assume_sorted: bool = False):
        s = np.atleast_2d(np.asarray(samples, dtype=float))
        if s.ndim != 2 or s.shape[1] < 2:
            raise ShapeError(f"need at least 2 samples per input, got shape {s.shape}")
        if not assume_sorted:
            s = np.sort(s, axis=1)
        self.samples = s

    def __len__(self) -> int:
        return self.samples.shape[0]

    def __getitem__(self, item) -> "SamplePredictive":
        return SamplePredictive(np.atleast_2d(self.samples[item]), assume_sorted=True)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def resolution(self) -> float:
        return 1.0 / self.n_samples

    def resolvable(self, p, side: str | None = None) -> np.ndarray:
        return empirical_quantile_index(p, self.n_samples, side) >= 0

    def quantile(self, p, side: str | None = None) -> np.ndarray:
        """Order-statistic quantiles; raises ``Saturated`` below the 1/S floor.

        ``side`` selects the lower- or upper-bound reading of the level (see
        :func:`empirical_quantile_index`).
        """
        p = _check_p(p)
        idx = empirical_quantile_index(p, self.n_samples, side)
        if np.any(idx < 0):
            bad = np.atleast_1d(p)[np.atleast_1d(idx) < 0][0]
            raise Saturated(float(min(bad, 1.0 - bad)), self.n_samples)
        return self.samples[np.arange(len(self)), idx]


Predictive = Union[GaussianPredictive, SamplePredictive]


def predictive(post: PosteriorState, x_star, mode: str = "analytic", n_samples: int = 100_000, rng=None) -> Predictive:
    """Batch predictive for the rows of ``x_star`` in the requested mode."""
    if mode == "analytic":
        mean, var = predictive_analytic(post, np.atleast_2d(x_star))
        return GaussianPredictive(mean, var)
    if mode in ("sampling", "empirical"):
        return SamplePredictive(draw_predictive(post, x_star, n_samples, rng), assume_sorted=True)
    raise DomainError(f"unknown predictive mode {mode!r}")


def predictive_quantile(pred: Predictive, p: float):
    """Quantile at level ``p``; a float for single-input predictives."""
    out = pred.quantile(p)
    return float(out[0]) if len(pred) == 1 else out
