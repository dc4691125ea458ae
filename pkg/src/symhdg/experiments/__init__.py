"""Manufactured problems, error norms and convergence reports."""

from .convergence import (
    CSV_COLUMNS,
    ConvergenceReport,
    LevelRecord,
    StudyConfig,
    UsageError,
    convergence_study,
    emit_report,
    observed_order,
    parse_csv_report,
    report_from_json,
)
from .norms import ErrorRecord, l2_errors
from .problems import Problem, manufactured_problem, polynomial_problem
from .superconvergence import projection_error

__all__ = [
    "CSV_COLUMNS",
    "ConvergenceReport",
    "ErrorRecord",
    "LevelRecord",
    "Problem",
    "StudyConfig",
    "UsageError",
    "convergence_study",
    "emit_report",
    "l2_errors",
    "manufactured_problem",
    "observed_order",
    "parse_csv_report",
    "polynomial_problem",
    "projection_error",
    "report_from_json",
]
