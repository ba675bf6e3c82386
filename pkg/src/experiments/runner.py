"""Experiment dispatch: run, classify the outcome, write artifacts and the manifest."""

from collections.abc import Callable
from pathlib import Path
from typing import Any, NamedTuple

import structlog

from src.cache.sqlite_cache import ResultCache, result_key
from src.experiments.common import (
    ARTIFACT_VERSION,
    ExitCode,
    ExperimentResult,
    build_error_response,
    cached_experiment_call,
    exit_code_for,
)
from src.experiments.outputs import write_artifacts, write_error_report, write_manifest
from src.experiments.rates import run_rate_sweep
from src.experiments.rho import run_alpha_check, run_rho
from src.experiments.risk import run_predict, run_risk
from src.experiments.schema import ExperimentConfig, dump_experiment
from src.experiments.spectral import run_spectral
from src.experiments.transfer import run_transfer_check
from src.similarity.explosion import ExplosionError

logger = structlog.get_logger(__name__)

RUNNERS: dict[str, Callable[[Any], ExperimentResult]] = {
    "spectral": run_spectral,
    "rho": run_rho,
    "alpha-check": run_alpha_check,
    "transfer-check": run_transfer_check,
    "risk": run_risk,
    "rate-sweep": run_rate_sweep,
    "predict": run_predict,
}


class RunOutcome(NamedTuple):
    exit_code: ExitCode
    response: dict[str, Any]
    out_dir: Path
    files: list[str]


def cache_key(config: ExperimentConfig) -> str:
    """Digest of the resolved section; the output directory does not enter it."""
    section = {k: v for k, v in dump_experiment(config).items() if k != "output"}
    return result_key(section, config.seed, ARTIFACT_VERSION)


async def run_experiment(
    config: ExperimentConfig, out_dir: Path, cache: ResultCache | None = None
) -> RunOutcome:
    """Run one experiment and write its artifacts under ``out_dir``.

    Exit codes: 0 success, 1 invalid input (including failed preconditions),
    2 failed check, 3 infinite rho_h where finiteness was required. Failed
    checks still write their full report.
    """
    logger.info("experiment_started", kind=config.kind, seed=config.seed, out_dir=str(out_dir))
    runner = RUNNERS[config.kind]
    try:
        response = await cached_experiment_call(cache, cache_key(config), runner, config)
    except ExplosionError as e:
        response = build_error_response(str(e), "EXPLOSION")
    except ValueError as e:
        response = build_error_response(str(e), "VALIDATION_ERROR")

    if response["status"] == "success":
        document = response["data"]
        files = write_artifacts(out_dir, document)
        if document.get("verdict") == "fail":
            response = build_error_response(
                document.get("failure") or "check failed", "CHECK_FAILED", data=document
            )
    else:
        error = response["error"]
        files = write_error_report(out_dir, config.kind, error["type"], error["message"])

    error = response.get("error")
    exit_code = ExitCode.SUCCESS if error is None else exit_code_for(error["type"])
    write_manifest(
        out_dir, dump_experiment(config), files, response["status"], int(exit_code), error
    )
    logger.info(
        "experiment_completed",
        kind=config.kind,
        exit_code=int(exit_code),
        files=len(files),
        cached=response.get("metadata", {}).get("cached", False),
    )
    return RunOutcome(exit_code, response, out_dir, files)
