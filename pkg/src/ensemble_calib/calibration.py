"""Quantile calibration of ensemble predictive intervals.

For a quantile level ``q`` in (0, 0.5] each predictive yields the interval
``[c1(q), c2(q)]`` between its ``q`` and ``1 - q`` quantiles. Missing a
held-out label costs 1 (0-1 loss), and the calibrated level is the largest
grid ``q`` whose average loss on the quantile-estimation set is at most
``alpha``. Intervals nest as ``q`` shrinks, so the empirical risk is monotone
and scanning the grid from 0.5 downward stops at that level.

The held-out guarantee uses Hoeffding's inequality with a union bound over
the grid: with probability at least ``1 - epsilon`` the true miscoverage of the
selected level is below ``alpha + sqrt(log(2 G / epsilon) / (2 m))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blr import Dataset, Predictive, SamplePredictive
from .errors import ConfigError, DomainError, Saturated, ShapeError

GRID_SIZE = 512
GRID2_SIZE = 64
ANALYTIC_Q_MIN = 1e-6
EMPIRICAL_Q_MIN = 1e-4


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lower, upper]``; fields may be floats or equal-length arrays."""

    lower: np.ndarray | float
    upper: np.ndarray | float

    def __post_init__(self):
        if np.any(np.asarray(self.lower) > np.asarray(self.upper)):
            raise DomainError("interval lower bound exceeds upper bound")

    @property
    def width(self):
        return np.asarray(self.upper) - np.asarray(self.lower)

    def contains(self, y):
        y = np.asarray(y, dtype=float)
        return (np.asarray(self.lower) <= y) & (y <= np.asarray(self.upper))


@dataclass(frozen=True)
class PacBound:
    epsilon: float
    slack: float
    calib_size: int
    grid_size: int


@dataclass(frozen=True)
class CalibrationResult:
    """Outcome of the symmetric grid search.

    ``risks`` holds the empirical risk at every grid level (NaN where the level
    is not resolvable by the predictive samples).
    """

    q_hat: float
    empirical_risk: float
    alpha: float
    grid: np.ndarray
    risks: np.ndarray
    saturated: bool
    pac: PacBound

    @property
    def risk_bound(self) -> float:
        return self.empirical_risk + self.pac.slack


@dataclass(frozen=True)
class AsymmetricCalibrationResult:
    """Outcome of the two-level search; the interval is ``[F^-1(q_lower), F^-1(q_upper)]``."""

    q_lower: float
    q_upper: float
    empirical_risk: float
    mean_width: float
    alpha: float
    grid: np.ndarray
    saturated: bool
    pac: PacBound


def _check_q(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if np.any(~(q > 0.0) | ~(q <= 0.5)):
        raise DomainError(f"quantile level must lie in (0, 0.5], got {q}")
    return q


def _check_alpha(alpha: float) -> float:
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    return float(alpha)


def _outputs(calib_set, predictives: Predictive) -> np.ndarray:
    y = calib_set.outputs if isinstance(calib_set, Dataset) else np.asarray(calib_set, dtype=float).reshape(-1)
    if y.size == 0:
        raise ShapeError("calibration set is empty")
    if y.size != len(predictives):
        raise ShapeError(f"{y.size} calibration points but {len(predictives)} predictives")
    return y


def interval_bounds(pred: Predictive, q) -> Interval:
    """Interval between the ``q`` and ``1 - q`` predictive quantiles.

    In empirical mode the bounds are the ``k``-th smallest and ``k``-th largest
    samples with ``k = floor(q S)``; ``Saturated`` is raised when ``k = 0``.
    """
    q = _check_q(q)
    return Interval(pred.quantile(q, "lower"), pred.quantile(1.0 - q, "upper"))


def loss_01(y, q, pred: Predictive):
    """0 when ``y`` lies in the closed interval at level ``q``, 1 otherwise."""
    miss = ~interval_bounds(pred, q).contains(y)
    out = miss.astype(int)
    return int(out[0]) if out.size == 1 else out


def empirical_risk(calib_set, q: float, predictives: Predictive) -> float:
    """Fraction of calibration labels outside their interval at level ``q``."""
    y = _outputs(calib_set, predictives)
    return float(np.mean(np.atleast_1d(loss_01(y, q, predictives))))


def pac_slack(m: int, grid_size: int, epsilon: float) -> PacBound:
    """Two-sided Hoeffding slack with a union bound over ``grid_size`` levels."""
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    if m < 1 or grid_size < 1:
        raise DomainError("calibration size and grid size must be at least 1")
    slack = float(np.sqrt(np.log(2.0 * grid_size / epsilon) / (2.0 * m)))
    return PacBound(float(epsilon), slack, int(m), int(grid_size))


def q_floor(pred: Predictive) -> float:
    if isinstance(pred, SamplePredictive):
        return max(EMPIRICAL_Q_MIN, 1.0 / pred.n_samples)
    return ANALYTIC_Q_MIN


def default_grid(pred: Predictive | None = None, size: int = GRID_SIZE, q_min: float | None = None) -> np.ndarray:
    """``size`` levels evenly spaced on [q_min, 0.5], largest first."""
    if q_min is None:
        q_min = q_floor(pred) if pred is not None else ANALYTIC_Q_MIN
    return np.linspace(0.5, q_min, size)


def risk_curve(y, predictives: Predictive, grid) -> np.ndarray:
    """Empirical risk at each grid level; NaN where the level is unresolvable."""
    grid = _check_q(np.atleast_1d(grid))
    y = _outputs(y, predictives)
    ok = predictives.resolvable(grid, "lower")
    risks = np.full(grid.shape, np.nan)
    if np.any(ok):
        levels = grid[ok][:, None]
        lower = predictives.quantile(levels, "lower")
        upper = predictives.quantile(1.0 - levels, "upper")
        covered = (lower <= y) & (y <= upper)
        risks[ok] = 1.0 - covered.mean(axis=1)
    return risks


def calibrate_q(calib_set, predictives: Predictive, alpha: float, grid=None, epsilon: float = 0.05) -> CalibrationResult:
    """Largest grid level whose empirical risk is at most ``alpha``.

    If no resolvable level qualifies, the smallest resolvable level is returned
    with ``saturated=True``. The predictive mass the data needs lies beyond
    what the samples can represent, and the result says so rather than
    clamping silently.
    """
    alpha = _check_alpha(alpha)
    if grid is None:
        grid = default_grid(predictives)
    grid = np.asarray(grid, dtype=float).reshape(-1)
    if grid.size == 0:
        raise ConfigError("grid", "quantile grid is empty")
    grid = -np.sort(-_check_q(grid))
    y = _outputs(calib_set, predictives)
    risks = risk_curve(y, predictives, grid)
    resolvable = ~np.isnan(risks)
    if not np.any(resolvable):
        raise Saturated(float(grid.max()), getattr(predictives, "n_samples", 0))

    pac = pac_slack(y.size, grid.size, epsilon)
    admissible = np.flatnonzero(resolvable & (risks <= alpha))
    if admissible.size:
        i = int(admissible[0])
        saturated = False
    else:
        i = int(np.flatnonzero(resolvable)[-1])
        saturated = True
    return CalibrationResult(float(grid[i]), float(risks[i]), alpha, grid, risks, saturated, pac)


def default_grid2(pred: Predictive | None = None, size: int = GRID2_SIZE, q_min: float | None = None) -> np.ndarray:
    """Triangular grid of ``(q_lower, q_upper)`` pairs with ``q_lower <= q_upper``."""
    if q_min is None:
        q_min = q_floor(pred) if pred is not None else ANALYTIC_Q_MIN
    levels = np.linspace(q_min, 1.0 - q_min, size)
    i, j = np.triu_indices(size)
    return np.column_stack([levels[i], levels[j]])


def calibrate_q2(calib_set, predictives: Predictive, alpha: float, grid2=None, epsilon: float = 0.05) -> AsymmetricCalibrationResult:
    """Narrowest admissible asymmetric interval over a grid of level pairs.

    Among pairs with empirical risk at most ``alpha`` the one with smallest
    mean width on the calibration set wins (ties go to the larger lower level,
    then the smaller upper level). Without an admissible pair the widest
    resolvable pair is returned with ``saturated=True``.
    """
    alpha = _check_alpha(alpha)
    if grid2 is None:
        grid2 = default_grid2(predictives)
    grid2 = np.asarray(grid2, dtype=float).reshape(-1, 2)
    if grid2.shape[0] == 0:
        raise ConfigError("grid2", "pair grid is empty")
    if np.any(~(grid2 > 0.0) | ~(grid2 < 1.0)) or np.any(grid2[:, 0] > grid2[:, 1]):
        raise DomainError("level pairs must lie in (0, 1) with q_lower <= q_upper")
    y = _outputs(calib_set, predictives)

    levels, inverse = np.unique(grid2, return_inverse=True)
    inverse = inverse.reshape(grid2.shape)
    ok_lo = predictives.resolvable(levels, "lower")
    ok_hi = predictives.resolvable(levels, "upper")
    ok = ok_lo[inverse[:, 0]] & ok_hi[inverse[:, 1]]
    if not np.any(ok):
        raise Saturated(float(levels.min()), getattr(predictives, "n_samples", 0))

    lower_q = np.full((levels.size, y.size), np.nan)
    upper_q = np.full((levels.size, y.size), np.nan)
    lower_q[ok_lo] = predictives.quantile(levels[ok_lo][:, None], "lower")
    upper_q[ok_hi] = predictives.quantile(levels[ok_hi][:, None], "upper")
    lo, hi = lower_q[inverse[ok, 0]], upper_q[inverse[ok, 1]]
    covered = (lo <= y) & (y <= hi)
    risks = np.full(grid2.shape[0], np.nan)
    widths = np.full(grid2.shape[0], np.nan)
    risks[ok] = 1.0 - covered.mean(axis=1)
    widths[ok] = (hi - lo).mean(axis=1)

    pac = pac_slack(y.size, grid2.shape[0], epsilon)
    admissible = np.flatnonzero(ok & (risks <= alpha))
    if admissible.size:
        order = np.lexsort((grid2[admissible, 1], -grid2[admissible, 0], widths[admissible]))
        i = int(admissible[order[0]])
        saturated = False
    else:
        cand = np.flatnonzero(ok)
        i = int(cand[np.argmax(widths[cand])])
        saturated = True
    return AsymmetricCalibrationResult(
        float(grid2[i, 0]), float(grid2[i, 1]), float(risks[i]), float(widths[i]),
        alpha, grid2, saturated, pac,
    )


def symmetric_pairs(grid) -> np.ndarray:
    """Pairs ``(q, 1 - q)`` reproducing the symmetric search inside :func:`calibrate_q2`."""
    grid = _check_q(np.atleast_1d(grid))
    return np.column_stack([grid, 1.0 - grid])


__all__ = [
    "AsymmetricCalibrationResult",
    "CalibrationResult",
    "Interval",
    "PacBound",
    "calibrate_q",
    "calibrate_q2",
    "default_grid",
    "default_grid2",
    "empirical_risk",
    "interval_bounds",
    "loss_01",
    "pac_slack",
    "risk_curve",
    "symmetric_pairs",
]
