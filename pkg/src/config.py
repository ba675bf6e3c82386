"""Application configuration management using Pydantic Settings.

This module provides a centralized configuration class that loads settings
from environment variables (``SHIFTLAB_*``) or a ``.env`` file, plus the
loader for YAML experiment files.
"""

import os
from pathlib import Path
from typing import Any

import yaml
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Runtime settings loaded from environment variables.

    Experiment parameters live in the YAML experiment file; these settings
    only cover how runs are executed (parallelism, logging, Monte Carlo
    defaults and the optional result cache).
    """

    # Execution
    threads: int | None = Field(
        default=None,
        ge=1,
        description="Worker threads for replications (default: machine parallelism)",
    )

    # Chain simulation defaults
    burn_in: int = Field(
        default=1000, ge=0, description="Burn-in steps before a chain is treated as stationary"
    )
    thinning: int = Field(
        default=10, ge=1, description="Thinning interval for surrogate stationary samples"
    )
    default_reps: int = Field(default=32, ge=1, description="Default replication count")

    # Monte Carlo budgets for rho_h
    rho_outer_n: int = Field(default=10_000, ge=1, description="Target draws for MC rho")
    rho_inner_n: int = Field(default=10_000, ge=1, description="Source draws for MC rho")

    # Cache Configuration
    cache_db_path: str | None = Field(
        default=None, description="SQLite result cache path (cache disabled when unset)"
    )
    cache_ttl_seconds: int = Field(
        default=7 * 24 * 3600, description="Cache TTL in seconds (default: 7 days)"
    )

    # Logging Configuration
    log_level: str = Field(
        default="INFO",
        description="Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)",
    )
    log_format: str = Field(default="json", description="Log output format (json or console)")

    model_config = SettingsConfigDict(
        env_prefix="SHIFTLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


def worker_count() -> int:
    """Number of worker threads used for replications."""
    return settings.threads or os.cpu_count() or 1


def load_config_file(config_path: str | Path) -> dict[str, Any]:
    """Load an experiment configuration file.

    Args:
        config_path: Path to the YAML experiment file.

    Returns:
        Parsed configuration tree.

    Raises:
        FileNotFoundError: If the file does not exist.
        ValueError: If the document is not a mapping.
    """
    path = Path(config_path)
    if not path.exists():
        raise FileNotFoundError(f"Experiment config not found: {path}")

    with open(path, encoding="utf-8") as f:
        data = yaml.safe_load(f)

    if not isinstance(data, dict):
        raise ValueError(f"Experiment config must be a mapping: {path}")
    return data


# Singleton instance - import this to access settings throughout the application
settings = Settings()
