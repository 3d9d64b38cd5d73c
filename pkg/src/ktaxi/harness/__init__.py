"""Experiment configuration, seeded batch runs, CSV reports and the CLI."""
from .config import ConfigError, ExperimentConfig, load_config
from .experiment import RatioReport, TrialResult, run_experiment, run_trial, trial_rng
from .report import read_report_csv, write_report_csv
from .verify import SUITES

__all__ = [
    "ConfigError", "ExperimentConfig", "load_config", "RatioReport", "TrialResult",
    "run_experiment", "run_trial", "trial_rng", "read_report_csv", "write_report_csv", "SUITES",
]
