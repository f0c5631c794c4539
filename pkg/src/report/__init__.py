"""
Report package for benchmark results.
"""

from .html_reporter import HTMLReporter
from .metrics import abs_error, average_mae, ground_truth, mae, mae_by_process
from .runner import (
    DEFAULT_WINDOWS,
    BenchmarkRun,
    BenchRunner,
    compare,
    evaluate_method,
    method_variants,
)

__all__ = [
    "HTMLReporter",
    "abs_error",
    "average_mae",
    "ground_truth",
    "mae",
    "mae_by_process",
    "DEFAULT_WINDOWS",
    "BenchmarkRun",
    "BenchRunner",
    "compare",
    "evaluate_method",
    "method_variants",
]
