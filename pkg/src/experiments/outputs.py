"""Artifact writers: CSV tables, the JSON report, plot series and the manifest.

CSV numbers use 17 significant digits; infinite values are written as the
literal token ``inf``. Every file except the manifest is a pure function of
the result document, and the manifest keeps its timestamp on a single line.
"""

import csv
import math
from collections.abc import Iterable, Sequence
from datetime import UTC, datetime
from pathlib import Path
from typing import Any

import structlog

from src.experiments.common import ARTIFACT_VERSION, Table, dumps

logger = structlog.get_logger(__name__)

REPORT_FILE = "report.json"
MANIFEST_FILE = "manifest.json"


def format_number(value: Any) -> str:
    """One CSV cell.

    Examples:
        >>> format_number(0.1)
        '0.10000000000000001'
        >>> format_number(float("inf"))
        'inf'
        >>> format_number(None)
        ''
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(cell) for cell in row])


def _log(value: Any) -> float:
    x = float(value)
    return math.log(x) if x > 0 else -math.inf


def emit_plot_data(document: dict[str, Any]) -> dict[str, Table]:
    """Two-column series for log-log plots of rates and rho curves.

    A rate report gives ``rate_plot.csv`` (log_n, log_risk). Each rho curve
    gives ``rho_<label>_plot.csv`` with every grid point, infinite values as
    ``inf``, and ``rho_<label>_fit.csv`` with the finite points only.
    """
    data = document.get("data", {})
    series: dict[str, Table] = {}
    points = data.get("points")
    if points:
        series["rate_plot.csv"] = Table(
            header=["log_n", "log_risk"], rows=[[_log(n), _log(r)] for n, r in points]
        )
    for label, curve in sorted(data.get("curves", {}).items()):
        rows = [[_log(h), _log(v)] for h, v in zip(curve["h"], curve["value"], strict=True)]
        series[f"rho_{label}_plot.csv"] = Table(header=["log_h", "log_rho"], rows=rows)
        series[f"rho_{label}_fit.csv"] = Table(
            header=["log_h", "log_rho"], rows=[row for row in rows if math.isfinite(row[1])]
        )
    return series


def write_artifacts(out_dir: Path, document: dict[str, Any]) -> list[str]:
    """Write ``report.json``, every table and the plot series.

    Returns:
        Relative paths of the written files, sorted.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / REPORT_FILE).write_text(
        dumps({key: document.get(key) for key in ("kind", "data", "verdict", "failure")}),
        encoding="utf-8",
    )
    files = [REPORT_FILE]
    tables = {name: Table.model_validate(t) for name, t in document.get("tables", {}).items()}
    tables.update(emit_plot_data(document))
    for name, table in sorted(tables.items()):
        write_csv(out_dir / name, table.header, table.rows)
        files.append(name)
    logger.debug("artifacts_written", out_dir=str(out_dir), files=len(files))
    return sorted(files)


def write_error_report(out_dir: Path, kind: str, error_type: str, message: str) -> list[str]:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / REPORT_FILE).write_text(
        dumps({"kind": kind, "error": {"type": error_type, "message": message}}),
        encoding="utf-8",
    )
    return [REPORT_FILE]


def write_manifest(
    out_dir: Path,
    config: dict[str, Any],
    files: Sequence[str],
    status: str,
    exit_code: int,
    error: dict[str, Any] | None = None,
) -> Path:
    """Echo the resolved config and list every artifact by relative path."""
    manifest: dict[str, Any] = {
        "artifact_version": ARTIFACT_VERSION,
        "config": config,
        "exit_code": exit_code,
        "files": sorted(files),
        "generated_at": datetime.now(UTC).isoformat(),
        "status": status,
    }
    if error is not None:
        manifest["error"] = error
    path = out_dir / MANIFEST_FILE
    path.write_text(dumps(manifest), encoding="utf-8")
    return path
