"""Kappa sweeps, stakeholder metrics and reports."""

from .exceptions import AnalysisError, EmptySweepError, InvalidGridError, ReportError
from .metrics import MetricsRow, evaluate_metrics
from .report import emit_report, format_summary, summary_to_dict
from .sweep import (
    SweepProgressTracker,
    SweepTable,
    evaluate_kappa,
    parse_grid,
    participant_optimal_kappa,
    summary_rows,
    sweep_kappa,
    sweep_kappa_async,
    validate_grid,
)

__version__ = "1.0.0"
__all__ = [
    "AnalysisError",
    "EmptySweepError",
    "InvalidGridError",
    "ReportError",
    "MetricsRow",
    "evaluate_metrics",
    "emit_report",
    "format_summary",
    "summary_to_dict",
    "SweepProgressTracker",
    "SweepTable",
    "evaluate_kappa",
    "parse_grid",
    "participant_optimal_kappa",
    "summary_rows",
    "sweep_kappa",
    "sweep_kappa_async",
    "validate_grid",
]
