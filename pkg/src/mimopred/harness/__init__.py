"""Metrics, Monte Carlo runner, serialization and command line."""

from .experiment import ExperimentConfig, ResultTable, Row, run_experiment, run_trial
from .metrics import empirical_cdf, match_paths, nmse, nse, rmse

__all__ = [
    "ExperimentConfig",
    "ResultTable",
    "Row",
    "empirical_cdf",
    "match_paths",
    "nmse",
    "nse",
    "rmse",
    "run_experiment",
    "run_trial",
]
