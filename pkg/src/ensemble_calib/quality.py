"""Monte Carlo estimates of how well a prior's predictive intervals cover.

For a prior, each replication draws a training set from the generator, fits
the conjugate posterior and measures the conditional coverage of the
equal-tailed ``1 - alpha`` predictive interval on ``inner_reps`` fresh
(input, output) pairs. Three summaries of the replication coverages are
offered:

* ``estimate_Q``: their mean (average-case quality);
* ``estimate_Q_worst``: their minimum, a sampled lower envelope of the
  worst-case quality (the infimum over all training sets is out of reach);
* ``estimate_Q_prob``: the fraction reaching ``threshold`` (default
  ``1 - alpha``).

In sampling mode a replication whose tail level falls below the sample
resolution is counted as saturated and left out of the summaries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blr import Dataset, PriorSpec, Predictive, posterior_update, predictive
from .calibration import Interval, interval_bounds
from .errors import DomainError, Saturated
from .gaussian import RngStream

KINDS = ("average", "worst", "probabilistic")


@dataclass(frozen=True)
class GeneratorSpec:
    """Linear-Gaussian data generator with a leading intercept column.

    ``beta`` fixes the coefficients; when it is ``None`` they are redrawn for
    every training set from N(0, beta_scale * I), which makes a prior equal to
    that distribution exactly well specified. ``missing_beta`` adds a hidden
    standard-normal feature the fitted model never sees.
    """

    d: int = 20
    n_train: int = 30
    sigma2: float = 4.0
    beta: np.ndarray | None = None
    beta_scale: float = 1.0
    missing_beta: float | None = None

    def __post_init__(self):
        if self.d < 1 or self.n_train < 1:
            raise DomainError("generator sizes must be at least 1")
        if not self.sigma2 > 0:
            raise DomainError("sigma2 must be positive")
        if self.beta is not None:
            beta = np.asarray(self.beta, dtype=float).reshape(-1)
            if beta.size != self.d:
                raise DomainError(f"beta has {beta.size} entries, expected {self.d}")
            object.__setattr__(self, "beta", beta)

    def draw_beta(self, gen: np.random.Generator) -> np.ndarray:
        if self.beta is not None:
            return self.beta
        return np.sqrt(self.beta_scale) * gen.standard_normal(self.d)

    def draw(self, n: int, beta: np.ndarray, gen: np.random.Generator) -> Dataset:
        x = np.column_stack([np.ones(n), gen.standard_normal((n, self.d - 1))])
        hidden = gen.standard_normal(n)
        y = x @ beta + np.sqrt(self.sigma2) * gen.standard_normal(n)
        if self.missing_beta is not None:
            y = y + self.missing_beta * hidden
        return Dataset(x, y)


@dataclass(frozen=True)
class QualityEstimate:
    kind: str
    value: float
    mc_reps: int
    inner_reps: int
    std_error: float
    n_saturated: int = 0


def central_interval(pred: Predictive, alpha: float) -> Interval:
    """Equal-tailed interval between the alpha/2 and 1 - alpha/2 quantiles."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return interval_bounds(pred, alpha / 2.0)


def conditional_coverages(prior: PriorSpec, gen: GeneratorSpec, alpha, mc_reps: int, inner_reps: int,
                          rng, mode: str = "analytic", n_samples: int = 10_000) -> np.ndarray:
    """Coverage of the central interval on fresh pairs, one entry per training set.

    ``alpha`` may be a sequence; the result then has one row per level, all
    evaluated on the same draws. Saturated replications are NaN.
    """
    if mc_reps < 1 or inner_reps < 1:
        raise DomainError("mc_reps and inner_reps must be at least 1")
    if prior.dim != gen.d:
        raise DomainError(f"prior dimension {prior.dim} does not match generator dimension {gen.d}")
    alphas = np.atleast_1d(np.asarray(alpha, dtype=float))
    root = rng if isinstance(rng, RngStream) else RngStream(int(rng))
    out = np.full((alphas.size, mc_reps), np.nan)
    for r in range(mc_reps):
        g = root.spawn(r).generator()
        beta = gen.draw_beta(g)
        train = gen.draw(gen.n_train, beta, g)
        fresh = gen.draw(inner_reps, beta, g)
        post = posterior_update(prior, train, gen.sigma2)
        pred = predictive(post, fresh.inputs, mode, n_samples, g)
        for j, a in enumerate(alphas):
            try:
                out[j, r] = central_interval(pred, a).contains(fresh.outputs).mean()
            except Saturated:
                pass
    return out if np.ndim(alpha) else out[0]


def summarize(coverages: np.ndarray, kind: str, alpha: float, inner_reps: int, threshold: float | None = None) -> QualityEstimate:
    """Reduce per-replication coverages to one of the three quality measures."""
    cov = np.asarray(coverages, dtype=float)
    ok = cov[~np.isnan(cov)]
    n_sat = int(cov.size - ok.size)
    if ok.size == 0:
        return QualityEstimate(kind, float("nan"), cov.size, inner_reps, float("nan"), n_sat)
    if kind == "average":
        value = float(ok.mean())
        se = float(ok.std(ddof=1) / np.sqrt(ok.size)) if ok.size > 1 else 0.0
    elif kind == "worst":
        value = float(ok.min())
        # binomial error of the inner average at the minimizing replication
        se = float(np.sqrt(value * (1.0 - value) / inner_reps))
    elif kind == "probabilistic":
        level = 1.0 - alpha if threshold is None else threshold
        value = float(np.mean(ok >= level))
        se = float(np.sqrt(value * (1.0 - value) / ok.size))
    else:
        raise DomainError(f"unknown quality kind {kind!r}")
    return QualityEstimate(kind, value, cov.size, inner_reps, se, n_sat)


def estimate_Q(prior, gen, alpha=0.1, mc_reps=200, inner_reps=1000, rng=0, mode="analytic", n_samples=10_000) -> QualityEstimate:
    """Average coverage over training sets and fresh pairs."""
    cov = conditional_coverages(prior, gen, alpha, mc_reps, inner_reps, rng, mode, n_samples)
    return summarize(cov, "average", alpha, inner_reps)


def estimate_Q_worst(prior, gen, alpha=0.1, mc_reps=200, inner_reps=1000, rng=0, mode="analytic", n_samples=10_000) -> QualityEstimate:
    """Smallest conditional coverage among the sampled training sets."""
    cov = conditional_coverages(prior, gen, alpha, mc_reps, inner_reps, rng, mode, n_samples)
    return summarize(cov, "worst", alpha, inner_reps)


def estimate_Q_prob(prior, gen, alpha=0.1, mc_reps=200, inner_reps=1000, rng=0, mode="analytic",
                    n_samples=10_000, threshold: float | None = None) -> QualityEstimate:
    """Fraction of training sets whose conditional coverage reaches ``threshold``."""
    cov = conditional_coverages(prior, gen, alpha, mc_reps, inner_reps, rng, mode, n_samples)
    return summarize(cov, "probabilistic", alpha, inner_reps, threshold)


def estimate_all(prior, gen, alpha=0.1, mc_reps=200, inner_reps=1000, rng=0, mode="analytic",
                 n_samples=10_000, threshold: float | None = None) -> dict[str, QualityEstimate]:
    """All three measures from one shared set of replications."""
    cov = conditional_coverages(prior, gen, alpha, mc_reps, inner_reps, rng, mode, n_samples)
    return {kind: summarize(cov, kind, alpha, inner_reps, threshold) for kind in KINDS}
