"""Configuration-driven experiment runners.

One runner per experiment kind, a shared response envelope with exit codes,
and writers for the JSON report, CSV tables, plot series and manifest.
"""

from src.experiments.common import (
    ExitCode,
    ExperimentResult,
    Table,
    build_error_response,
    build_success_response,
    cached_experiment_call,
)
from src.experiments.outputs import emit_plot_data, format_number, write_artifacts
from src.experiments.runner import RUNNERS, RunOutcome, run_experiment
from src.experiments.schema import ExperimentConfig, dump_experiment, parse_experiment

__all__ = [
    "RUNNERS",
    "ExitCode",
    "ExperimentConfig",
    "ExperimentResult",
    "RunOutcome",
    "Table",
    "build_error_response",
    "build_success_response",
    "cached_experiment_call",
    "dump_experiment",
    "emit_plot_data",
    "format_number",
    "parse_experiment",
    "run_experiment",
    "write_artifacts",
]
