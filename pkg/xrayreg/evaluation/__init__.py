# xrayreg/evaluation/__init__.py
"""
Perturbation protocol, mTREproj metric and experiment reports.
"""
from .perturbation import EVAL_STDS, PerturbSpec, perturb, perturbation_stream, trial_seed
from .metrics import mtre_proj, success_threshold, threshold_for_diagonal
from .experiment import (
    REPORT_COLUMNS,
    ExperimentReport,
    Method,
    MethodOutcome,
    XrayCase,
    cnn_method,
    intensity_method,
    make_xray_case,
    noop_method,
    oracle_method,
    render_table,
    run_experiment,
    summarize,
    write_report,
)

__all__ = [
    "EVAL_STDS",
    "PerturbSpec",
    "perturb",
    "perturbation_stream",
    "trial_seed",
    "mtre_proj",
    "success_threshold",
    "threshold_for_diagonal",
    "REPORT_COLUMNS",
    "ExperimentReport",
    "Method",
    "MethodOutcome",
    "XrayCase",
    "cnn_method",
    "intensity_method",
    "make_xray_case",
    "noop_method",
    "oracle_method",
    "render_table",
    "run_experiment",
    "summarize",
    "write_report",
]
