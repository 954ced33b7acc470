"""Simulation studies: naive versus calibrated predictive intervals across priors.

Each (prior mean, seed) cell draws a training set, a quantile-estimation set
and a test set from a linear model with an intercept and standard-normal
features, fits the conjugate posterior under the prior N(i * 1, scale * I),
and scores two interval constructions on the test set:

* ``naive``: predictive quantiles at alpha/2 and 1 - alpha/2;
* ``calibrated``: predictive quantiles at q_hat and 1 - q_hat, with q_hat
  chosen by grid search on the quantile-estimation set.

Setting ``missing_beta`` adds a standard-normal feature with that coefficient
to the generator only, so the fitted model is misspecified.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .blr import (
    Dataset,
    GaussianPredictive,
    PosteriorState,
    PriorSpec,
    SamplePredictive,
    ensemble_draws,
    lower_rank,
    posterior_update,
    predictive_analytic,
    sample_ensemble,
)
from .calibration import ANALYTIC_Q_MIN, EMPIRICAL_Q_MIN, calibrate_q, default_grid
from .errors import ConfigError, Saturated
from .gaussian import RngStream, normal_quantile

ROLES = {"train": 0, "calib": 1, "test": 2}
METHODS = ("naive", "calibrated")
THREADS_ENV = "ENSEMBLE_CALIB_THREADS"

# stream keys below a seed
_BETA_KEY = 7
_SAMPLING_KEY = 3
# test-set rows drawn per block in sampling mode (bounds peak memory)
_TEST_BLOCK = 50


@dataclass(frozen=True)
class StudyConfig:
    """Settings of a simulation study; defaults reproduce the first study."""

    d: int = 20
    n_train: int = 30
    n_calib: int = 30
    n_test: int = 300
    sigma2: float = 4.0
    prior_means: tuple[int, ...] = tuple(range(-10, 11))
    prior_scale: float = 2.0
    alpha: float = 0.1
    seeds: tuple[int, ...] = tuple(range(10))
    mode: str = "sampling"
    n_samples: int = 100_000
    missing_beta: float | None = None
    fixed_beta: bool = False
    grid_size: int = 512
    epsilon: float = 0.05
    mc_reps: int = 200
    inner_reps: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "prior_means", tuple(int(i) for i in self.prior_means))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        # canonical numeric types keep config hashes stable (4 vs 4.0)
        try:
            for key in ("d", "n_train", "n_calib", "n_test", "n_samples", "grid_size", "mc_reps", "inner_reps"):
                object.__setattr__(self, key, int(getattr(self, key)))
            for key in ("sigma2", "prior_scale", "alpha", "epsilon"):
                object.__setattr__(self, key, float(getattr(self, key)))
            if self.missing_beta is not None:
                object.__setattr__(self, "missing_beta", float(self.missing_beta))
        except (TypeError, ValueError):
            raise ConfigError(key, f"{key}: not a number") from None
        object.__setattr__(self, "fixed_beta", bool(self.fixed_beta))
        for key in ("d", "n_train", "n_calib", "n_test", "grid_size", "mc_reps", "inner_reps"):
            if int(getattr(self, key)) < 1:
                raise ConfigError(key, f"{key} must be at least 1")
        if self.d < 1:
            raise ConfigError("d")
        if not self.sigma2 > 0:
            raise ConfigError("sigma2", "sigma2 must be positive")
        if not self.prior_scale > 0:
            raise ConfigError("prior_scale", "prior_scale must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha", "alpha must lie in (0, 1)")
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError("epsilon", "epsilon must lie in (0, 1)")
        if self.mode not in ("analytic", "sampling"):
            raise ConfigError("mode", "mode must be 'analytic' or 'sampling'")
        if self.n_samples < 2:
            raise ConfigError("n_samples", "n_samples must be at least 2")
        if not self.prior_means:
            raise ConfigError("prior_means", "at least one prior mean is required")
        if not self.seeds:
            raise ConfigError("seeds", "at least one seed is required")
        if self.missing_beta is not None and not np.isfinite(self.missing_beta):
            raise ConfigError("missing_beta")

    def replace(self, **changes) -> "StudyConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        unknown = set(changes) - set(values)
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration key")
        values.update(changes)
        return StudyConfig(**values)

    @property
    def q_min(self) -> float:
        if self.mode == "sampling":
            return max(EMPIRICAL_Q_MIN, 1.0 / self.n_samples)
        return ANALYTIC_Q_MIN

    def prior(self, prior_mean: float) -> PriorSpec:
        return PriorSpec.isotropic(self.d, prior_mean, self.prior_scale)


def true_beta(cfg: StudyConfig, seed: int) -> np.ndarray:
    """Generator coefficients, standard normal, redrawn per seed unless ``fixed_beta``."""
    root = RngStream(0 if cfg.fixed_beta else seed)
    return root.spawn(_BETA_KEY).generator().standard_normal(cfg.d)


def generate_data(cfg: StudyConfig, role: str, seed: int, beta: np.ndarray | None = None) -> tuple[Dataset, np.ndarray]:
    """Draw the ``role`` dataset for ``seed``.

    Returns the dataset the model sees and the hidden feature column. The
    hidden column is always drawn (from its own stream) so a zero or absent
    ``missing_beta`` reproduces the well-specified data bit for bit.
    """
    if role not in ROLES:
        raise ConfigError("role", f"unknown dataset role {role!r}")
    n = {"train": cfg.n_train, "calib": cfg.n_calib, "test": cfg.n_test}[role]
    if beta is None:
        beta = true_beta(cfg, seed)
    stream = RngStream(seed).spawn(ROLES[role])
    features = stream.spawn(0).generator().standard_normal((n, cfg.d - 1))
    hidden = stream.spawn(1).generator().standard_normal(n)
    noise = stream.spawn(2).generator().standard_normal(n)
    x = np.column_stack([np.ones(n), features])
    y = x @ beta
    if cfg.missing_beta is not None:
        y = y + cfg.missing_beta * hidden
    y = y + np.sqrt(cfg.sigma2) * noise
    return Dataset(x, y), hidden


@dataclass(frozen=True)
class CellRow:
    seed: int
    prior_mean: int
    method: str
    coverage: float
    mean_width: float
    q_used: float
    saturated: bool


@dataclass(frozen=True)
class SummaryRow:
    prior_mean: int
    method: str
    mean_coverage: float
    mean_width: float
    n_seeds: int
    n_saturated: int


@dataclass
class StudyReport:
    """Per-cell rows, per-prior-mean summary and any cell failures."""

    config: StudyConfig
    rows: list[CellRow] = field(default_factory=list)
    summary: list[SummaryRow] = field(default_factory=list)
    errors: list[tuple[int, int, str]] = field(default_factory=list)

    def series(self, method: str, column: str = "mean_coverage") -> dict[int, float]:
        """Summary column for ``method`` keyed by prior mean."""
        return {r.prior_mean: getattr(r, column) for r in self.summary if r.method == method}

    @property
    def any_saturated(self) -> bool:
        return any(r.saturated for r in self.rows)


def _score(y: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> tuple[float, float]:
    covered = (lower <= y) & (y <= upper)
    return float(covered.mean()), float(np.mean(upper - lower))


def _sampled_test_bounds(post: PosteriorState, betas: np.ndarray, x: np.ndarray, levels: list[float], gen) -> list[tuple[np.ndarray, np.ndarray]]:
    # Only a few order statistics are needed per test row, so partition instead
    # of sorting, block by block.
    s = betas.shape[0]
    ranks = [int(lower_rank(q, s)) for q in levels]
    for q, k in zip(levels, ranks):
        if k < 1:
            raise Saturated(q, s)
    kth = sorted({k - 1 for k in ranks} | {s - k for k in ranks})
    lows = [[] for _ in levels]
    highs = [[] for _ in levels]
    for start in range(0, x.shape[0], _TEST_BLOCK):
        draws = ensemble_draws(post, betas, x[start:start + _TEST_BLOCK], gen)
        draws.partition(kth, axis=1)
        for j, k in enumerate(ranks):
            lows[j].append(draws[:, k - 1])
            highs[j].append(draws[:, s - k])
    return [(np.concatenate(lo), np.concatenate(hi)) for lo, hi in zip(lows, highs)]


def run_cell(cfg: StudyConfig, prior_mean: int, seed: int) -> tuple[CellRow, CellRow]:
    """Fit, calibrate and score one (prior mean, seed) cell; returns (naive, calibrated)."""
    beta = true_beta(cfg, seed)
    train, _ = generate_data(cfg, "train", seed, beta)
    calib, _ = generate_data(cfg, "calib", seed, beta)
    test, _ = generate_data(cfg, "test", seed, beta)
    post = posterior_update(cfg.prior(prior_mean), train, cfg.sigma2)
    q_naive = cfg.alpha / 2.0
    grid = default_grid(size=cfg.grid_size, q_min=cfg.q_min)

    if cfg.mode == "analytic":
        cal = calibrate_q(calib, GaussianPredictive(*predictive_analytic(post, calib.inputs)), cfg.alpha, grid, cfg.epsilon)
        mean, var = predictive_analytic(post, test.inputs)
        sd = np.sqrt(var)
        bounds = []
        for q in (q_naive, cal.q_hat):
            z = normal_quantile(q)
            bounds.append((mean + z * sd, mean - z * sd))
    else:
        gen = RngStream(seed).spawn(_SAMPLING_KEY, prior_mean).generator()
        betas = sample_ensemble(post, cfg.n_samples, gen)
        calib_draws = ensemble_draws(post, betas, calib.inputs, gen)
        calib_draws.sort(axis=1)
        cal = calibrate_q(calib, SamplePredictive(calib_draws, assume_sorted=True), cfg.alpha, grid, cfg.epsilon)
        bounds = _sampled_test_bounds(post, betas, test.inputs, [q_naive, cal.q_hat], gen)

    (nl, nu), (cl, cu) = bounds
    n_cov, n_width = _score(test.outputs, nl, nu)
    c_cov, c_width = _score(test.outputs, cl, cu)
    return (
        CellRow(seed, prior_mean, "naive", n_cov, n_width, q_naive, False),
        CellRow(seed, prior_mean, "calibrated", c_cov, c_width, cal.q_hat, cal.saturated),
    )


def summarize(rows: list[CellRow], prior_means) -> list[SummaryRow]:
    out = []
    for i in prior_means:
        for method in METHODS:
            sel = [r for r in rows if r.prior_mean == i and r.method == method]
            if not sel:
                continue
            out.append(SummaryRow(
                i, method,
                float(np.mean([r.coverage for r in sel])),
                float(np.mean([r.mean_width for r in sel])),
                len(sel),
                sum(r.saturated for r in sel),
            ))
    return out


def default_workers() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(THREADS_ENV, f"{THREADS_ENV} must be an integer") from None
    return os.cpu_count() or 1


def iter_cells(cfg: StudyConfig, workers: int | None = None):
    """Yield ``((prior_mean, seed), rows or None, error or None)`` in (prior mean, seed) order.

    Cells own their random streams, so the output does not depend on
    ``workers`` or on completion order.
    """
    cells = [(i, s) for i in cfg.prior_means for s in cfg.seeds]
    workers = workers or default_workers()

    def task(cell):
        try:
            return cell, run_cell(cfg, *cell), None
        except Exception as exc:  # recorded, the study completes
            return cell, None, f"{type(exc).__name__}: {exc}"

    if workers == 1:
        yield from map(task, cells)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(task, cells)


def run_study(cfg: StudyConfig, workers: int | None = None) -> StudyReport:
    """Run every (prior mean, seed) cell and aggregate per prior mean.

    A failing cell is recorded in ``errors`` and the study carries on.
    """
    report = StudyReport(cfg)
    for (i, s), pair, err in iter_cells(cfg, workers):
        if pair is None:
            report.errors.append((i, s, err))
        else:
            report.rows.extend(pair)
    report.summary = summarize(report.rows, cfg.prior_means)
    return report


def config_dict(cfg: StudyConfig) -> dict:
    return asdict(cfg)
