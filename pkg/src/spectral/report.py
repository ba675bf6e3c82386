"""SpectralReport assembly for finite and continuous kernels."""

import math
from typing import Literal

import structlog
from pydantic import BaseModel, ConfigDict, Field

from src.chains.continuous import ContinuousKernel
from src.chains.finite import FiniteKernel, stationary_finite
from src.spectral.gaps import (
    DEFAULT_K_MAX,
    absolute_gap_finite,
    doeblin_mixing_bound,
    doeblin_to_rate,
    finite_doeblin,
    is_reversible,
    mixing_time_finite,
    pseudo_gap_finite,
)

logger = structlog.get_logger(__name__)


class SpectralReport(BaseModel):
    """Gaps, mixing time and Doeblin data of one kernel.

    ``method`` is ``exact`` for finite kernels. Continuous kernels only get
    ``doeblin-bound``: the pseudo gap is then the lower bound 1/(2 tau) from
    the Doeblin mixing-time bound and the absolute gap is left unset.
    """

    model_config = ConfigDict(frozen=True)

    kernel_id: str
    method: Literal["exact", "doeblin-bound"]
    absolute_gap: float | None = None
    periodic: bool = False
    pseudo_gap: float
    pseudo_gap_k: int | None = None
    pseudo_gap_truncated: bool = False
    mixing_time: int
    pseudo_gap_lower_bound: float = Field(description="1/(2 tau)")
    reversible: bool = False
    spectral_lower_bound: float | None = Field(
        default=None, description="1 - lambda^2 for reversible kernels"
    )
    doeblin_epsilon: float | None = None
    doeblin_lag: int | None = None
    kappa: float | None = None
    c: float | None = None

    def table_row(self) -> list[object]:
        return [
            self.kernel_id,
            self.absolute_gap,
            self.pseudo_gap,
            self.pseudo_gap_k,
            self.mixing_time,
            self.doeblin_epsilon,
            self.doeblin_lag,
            self.pseudo_gap_lower_bound,
            self.spectral_lower_bound,
        ]


TABLE_HEADER = [
    "kernel",
    "absolute_gap",
    "pseudo_gap",
    "k",
    "mixing_time",
    "doeblin_epsilon",
    "doeblin_lag",
    "gap_from_mixing",
    "gap_from_spectrum",
]


def spectral_report_finite(
    kernel: FiniteKernel,
    kernel_id: str = "P",
    k_max: int = DEFAULT_K_MAX,
    doeblin_lag: int = 1,
) -> SpectralReport:
    """Exact spectral diagnostics of a finite kernel."""
    pi = stationary_finite(kernel)
    absolute = absolute_gap_finite(kernel)
    pseudo = pseudo_gap_finite(kernel, k_max)
    mixing = mixing_time_finite(kernel, pi)
    reversible = is_reversible(kernel, pi)
    epsilon = finite_doeblin(kernel, doeblin_lag)
    rate = doeblin_to_rate(epsilon, doeblin_lag) if epsilon > 0 else None
    lam = 1.0 - absolute.value
    report = SpectralReport(
        kernel_id=kernel_id,
        method="exact",
        absolute_gap=absolute.value,
        periodic=absolute.periodic,
        pseudo_gap=pseudo.value,
        pseudo_gap_k=pseudo.k,
        pseudo_gap_truncated=pseudo.truncated,
        mixing_time=mixing.steps,
        pseudo_gap_lower_bound=mixing.pseudo_gap_lower_bound,
        reversible=reversible,
        spectral_lower_bound=1.0 - lam**2 if reversible else None,
        doeblin_epsilon=epsilon if rate else None,
        doeblin_lag=doeblin_lag if rate else None,
        kappa=rate.kappa if rate else None,
        c=rate.c if rate else None,
    )
    logger.debug("spectral_report_built", kernel_id=kernel_id, pseudo_gap=pseudo.value)
    return report


def spectral_report_continuous(spec: ContinuousKernel, kernel_id: str = "P") -> SpectralReport:
    """Doeblin-derived bounds for a continuous family."""
    epsilon, lag = spec.doeblin()
    rate = doeblin_to_rate(epsilon, lag)
    mixing = doeblin_mixing_bound(epsilon, lag)
    return SpectralReport(
        kernel_id=kernel_id,
        method="doeblin-bound",
        pseudo_gap=mixing.pseudo_gap_lower_bound,
        mixing_time=mixing.steps,
        pseudo_gap_lower_bound=mixing.pseudo_gap_lower_bound,
        doeblin_epsilon=epsilon,
        doeblin_lag=lag,
        kappa=rate.kappa,
        c=rate.c if math.isfinite(rate.c) else None,
    )
