"""Common utilities for experiment runners.

This module provides shared functionality for all runners including:
- Unified response formatting and exit codes
- Normalization of results into deterministic JSON
- Caching of finished results
"""

import asyncio
import json
import math
from collections.abc import Callable
from datetime import UTC, datetime
from enum import Enum, IntEnum
from importlib.metadata import PackageNotFoundError, version
from typing import Any

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field

from src.cache.sqlite_cache import ResultCache
from src.config import settings

logger = structlog.get_logger(__name__)

try:
    ARTIFACT_VERSION = version("shiftlab")
except PackageNotFoundError:
    ARTIFACT_VERSION = "0.1.0"


class ExitCode(IntEnum):
    SUCCESS = 0
    VALIDATION_ERROR = 1
    CHECK_FAILED = 2
    EXPLOSION = 3


def exit_code_for(error_type: str) -> ExitCode:
    """Map an error type of the response envelope to its process exit code."""
    return ExitCode[error_type] if error_type in ExitCode.__members__ else ExitCode.VALIDATION_ERROR


class Table(BaseModel):
    """A CSV table: header plus rows of numbers, strings or blanks."""

    model_config = ConfigDict(frozen=True)

    header: list[str]
    rows: list[list[Any]] = Field(default_factory=list)


class ExperimentResult(BaseModel):
    """What a runner produces.

    Attributes:
        kind: Experiment kind.
        data: Report payload written to ``report.json``.
        tables: CSV tables by file name.
        verdict: ``pass``/``fail`` for experiments that check something.
        failure: Diagnostic explaining a failed check.
    """

    model_config = ConfigDict(frozen=True)

    kind: str
    data: dict[str, Any]
    tables: dict[str, Table] = Field(default_factory=dict)
    verdict: str | None = None
    failure: str | None = None

    @property
    def failed(self) -> bool:
        return self.verdict == "fail"


def jsonable(value: Any) -> Any:
    """Plain JSON data with non-finite floats replaced by the tokens ``inf``, ``-inf``, ``nan``."""
    if isinstance(value, BaseModel):
        return jsonable(value.model_dump(mode="python"))
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, bool | np.bool_):
        return bool(value)
    if isinstance(value, int | np.integer):
        return int(value)
    if isinstance(value, float | np.floating):
        x = float(value)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(value, Enum):
        return value.value
    return value


def dumps(document: Any) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(jsonable(document), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def build_success_response(
    data: dict[str, Any],
    source: str = "computed",
    cached: bool = False,
) -> dict[str, Any]:
    """Build a standardized success response.

    Args:
        data: The normalized result document.
        source: Result source ("computed" or "cache").
        cached: Whether the result came from the cache.

    Returns:
        Standardized response dictionary.
    """
    return {
        "status": "success",
        "data": data,
        "metadata": {
            "generated_at": datetime.now(UTC).isoformat(),
            "source": source,
            "cached": cached,
            "artifact_version": ARTIFACT_VERSION,
        },
    }


def build_error_response(
    message: str,
    error_type: str = "VALIDATION_ERROR",
    data: dict[str, Any] | None = None,
) -> dict[str, Any]:
    """Build a standardized error response.

    Args:
        message: Human-readable diagnostic.
        error_type: ``VALIDATION_ERROR``, ``CHECK_FAILED`` or ``EXPLOSION``.
        data: Result document, when the run got far enough to produce one.

    Returns:
        Standardized error response dictionary.
    """
    response: dict[str, Any] = {
        "status": "error",
        "error": {
            "message": message,
            "type": error_type,
        },
        "metadata": {
            "generated_at": datetime.now(UTC).isoformat(),
            "artifact_version": ARTIFACT_VERSION,
        },
    }
    if data is not None:
        response["data"] = data
    return response


async def cached_experiment_call(
    cache: ResultCache | None,
    cache_key: str,
    compute_fn: Callable[..., ExperimentResult],
    *args: Any,
    **kwargs: Any,
) -> dict[str, Any]:
    """Run a blocking experiment with caching support.

    The cache is checked first; fresh results are normalized to JSON text
    before they are stored, and both paths return the document decoded from
    that text, so cached and fresh runs write identical artifacts.

    Args:
        cache: ResultCache instance, or None to disable caching.
        cache_key: Key for caching the result.
        compute_fn: Blocking function returning an ExperimentResult.
        *args: Positional arguments for compute_fn.
        **kwargs: Keyword arguments for compute_fn.

    Returns:
        Standardized success response whose ``data`` is the result document.
    """
    if cache is not None:
        cached_text = await cache.get(cache_key)
        if cached_text:
            logger.debug("experiment_cache_hit", cache_key=cache_key)
            return build_success_response(json.loads(cached_text), source="cache", cached=True)
        logger.debug("experiment_cache_miss", cache_key=cache_key)

    try:
        result = await asyncio.to_thread(compute_fn, *args, **kwargs)
    except Exception as e:
        logger.error("experiment_failed", cache_key=cache_key, error=str(e), exc_info=True)
        raise

    text = dumps(result)
    if cache is not None:
        await cache.set(cache_key, text, kind=result.kind, ttl=settings.cache_ttl_seconds)
    return build_success_response(json.loads(text), source="computed", cached=False)
