"""Bayesian posteriors as model ensembles, with frequentist calibration of their predictive intervals."""

__version__ = "0.1.0"

from .blr import (
    Dataset,
    GaussianPredictive,
    PosteriorState,
    PriorSpec,
    SamplePredictive,
    posterior_update,
    predictive,
    predictive_analytic,
    predictive_quantile,
    predictive_samples,
)
from .calibration import (
    CalibrationResult,
    Interval,
    PacBound,
    calibrate_q,
    calibrate_q2,
    empirical_risk,
    interval_bounds,
    loss_01,
    pac_slack,
)
from .errors import (
    ConfigError,
    DomainError,
    NotPositiveDefinite,
    ParseError,
    Saturated,
    ShapeError,
)
from .gaussian import RngStream, cholesky, mvn_sample, normal_cdf, normal_quantile
from .quality import (
    GeneratorSpec,
    QualityEstimate,
    central_interval,
    estimate_Q,
    estimate_Q_prob,
    estimate_all,
    estimate_Q_worst,
)
from .simulation import StudyConfig, StudyReport, generate_data, run_cell, run_study
