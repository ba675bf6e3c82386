"""Command-line entry point for shiftlab experiments.

Usage:
    shiftlab --config configs/spectral_two_state.yaml [--seed N] [--out DIR] [--quiet]

Logs go to stderr; stdout only carries the run summary.
"""

import argparse
import asyncio
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import structlog
from pydantic import ValidationError

from src.cache.sqlite_cache import ResultCache
from src.config import load_config_file, settings
from src.experiments.common import ExitCode
from src.experiments.runner import RunOutcome, run_experiment
from src.experiments.schema import ExperimentConfig, parse_experiment

logger = structlog.get_logger(__name__)


def configure_logging(quiet: bool = False) -> None:
    """Configure structlog for JSON or console output on stderr."""
    renderer: Any = (
        structlog.processors.JSONRenderer()
        if settings.log_format == "json"
        else structlog.dev.ConsoleRenderer()
    )
    level = getattr(logging, settings.log_level.upper(), logging.INFO)
    if quiet:
        level = max(level, logging.WARNING)

    structlog.configure(
        processors=[
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.add_log_level,
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            renderer,
        ],
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        wrapper_class=structlog.make_filtering_bound_logger(level),
        cache_logger_on_first_use=False,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shiftlab",
        description="Run a covariate-shift Markov chain experiment from a YAML config.",
    )
    parser.add_argument("--config", required=True, type=Path, help="experiment YAML file")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument("--quiet", action="store_true", help="only log warnings and errors")
    return parser


def format_validation_error(error: ValidationError) -> str:
    """One ``field.path: message`` line per offending field."""
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{location}: {item['msg']}")
    return "\n".join(lines)


def load_experiment(path: Path, seed: int | None = None) -> ExperimentConfig:
    """Read and validate an experiment file, applying a seed override.

    Raises:
        FileNotFoundError: If the file does not exist.
        ValueError: If the document is malformed or fails validation.
    """
    data = load_config_file(path)
    if seed is not None:
        data["seed"] = seed
    return parse_experiment(data)


def output_directory(config: ExperimentConfig, override: Path | None) -> Path:
    if override is not None:
        return override
    if config.output:
        return Path(config.output)
    return Path("runs") / config.kind


async def _run(config: ExperimentConfig, out_dir: Path) -> RunOutcome:
    cache = None
    if settings.cache_db_path:
        cache = ResultCache(settings.cache_db_path, settings.cache_ttl_seconds)
        await cache.initialize()
    try:
        return await run_experiment(config, out_dir, cache)
    finally:
        if cache is not None:
            await cache.close()


def main(argv: Sequence[str] | None = None) -> int:
    """Parse flags, run the experiment and return its exit code."""
    args = build_parser().parse_args(argv)
    configure_logging(args.quiet)

    try:
        config = load_experiment(args.config, args.seed)
    except ValidationError as e:
        print(f"invalid experiment config {args.config}:\n{format_validation_error(e)}", file=sys.stderr)
        return int(ExitCode.VALIDATION_ERROR)
    except (FileNotFoundError, ValueError) as e:
        print(f"invalid experiment config {args.config}: {e}", file=sys.stderr)
        return int(ExitCode.VALIDATION_ERROR)

    outcome = asyncio.run(_run(config, output_directory(config, args.out)))
    summary: dict[str, Any] = {
        "kind": config.kind,
        "exit_code": int(outcome.exit_code),
        "out_dir": str(outcome.out_dir),
        "files": outcome.files,
    }
    if "error" in outcome.response:
        summary["error"] = outcome.response["error"]
        print(outcome.response["error"]["message"], file=sys.stderr)
    if not args.quiet:
        print(json.dumps(summary, indent=2))
    return int(outcome.exit_code)


if __name__ == "__main__":
    sys.exit(main())
