"""Calibration, repeated-simulation studies and metric tables."""

from .calibration import calibrate_epsilon, epsilon_from_pool, select_m, tune_bsl_m
from .experiment import (Calibration, ExperimentConfig, calibrate, make_backend,
                         make_discrepancy, run_experiment, run_replicate, run_replicates)
from .metrics import MetricsTable, ReplicateResult, compute_metrics, summarize_samples

__all__ = [
    "calibrate_epsilon", "epsilon_from_pool", "select_m", "tune_bsl_m",
    "Calibration", "ExperimentConfig", "calibrate", "make_backend", "make_discrepancy",
    "run_experiment", "run_replicate", "run_replicates",
    "MetricsTable", "ReplicateResult", "compute_metrics", "summarize_samples",
]
