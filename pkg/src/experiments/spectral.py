"""Runner for ``kind: spectral``."""

import structlog

from src.chains.finite import FiniteKernel, stationary_finite
from src.experiments.common import ExperimentResult, Table
from src.experiments.schema import SpectralExperiment
from src.spectral.report import TABLE_HEADER, spectral_report_continuous, spectral_report_finite

logger = structlog.get_logger(__name__)


def run_spectral(config: SpectralExperiment) -> ExperimentResult:
    """Spectral report per kernel, in the order the kernels were given.

    Finite kernels also report their stationary law.
    """
    reports = []
    data: dict[str, object] = {}
    for kernel_id, kernel in config.kernels.items():
        if isinstance(kernel, FiniteKernel):
            report = spectral_report_finite(kernel, kernel_id, config.k_max, config.doeblin_lag)
            data[kernel_id] = report.model_dump() | {"stationary": stationary_finite(kernel).tolist()}
        else:
            report = spectral_report_continuous(kernel, kernel_id)
            data[kernel_id] = report.model_dump()
        reports.append(report)
        logger.info(
            "spectral_report_completed",
            kernel_id=kernel_id,
            method=report.method,
            pseudo_gap=report.pseudo_gap,
            mixing_time=report.mixing_time,
        )
    return ExperimentResult(
        kind=config.kind,
        data={"kernels": data},
        tables={"spectral.csv": Table(header=TABLE_HEADER, rows=[r.table_row() for r in reports])},
    )
