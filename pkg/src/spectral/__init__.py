"""Spectral and concentration diagnostics.

Exact gaps and mixing times for finite kernels, Doeblin-derived bounds for
continuous families, and the Bernstein and negative-moment bounds together
with their Monte Carlo counterparts.
"""

from src.spectral.concentration import (
    bernstein_tail,
    indicator_sums,
    negative_moment_estimate,
    negmom_bound,
    tail_frequency,
)
from src.spectral.gaps import (
    MixingTimeExceeded,
    SpectralError,
    absolute_gap_finite,
    adjoint_finite,
    doeblin_mixing_bound,
    doeblin_to_rate,
    finite_doeblin,
    is_reversible,
    mixing_time_finite,
    pseudo_gap_finite,
)
from src.spectral.report import SpectralReport, spectral_report_continuous, spectral_report_finite

__all__ = [
    "MixingTimeExceeded",
    "SpectralError",
    "SpectralReport",
    "absolute_gap_finite",
    "adjoint_finite",
    "bernstein_tail",
    "doeblin_mixing_bound",
    "doeblin_to_rate",
    "finite_doeblin",
    "indicator_sums",
    "is_reversible",
    "mixing_time_finite",
    "negative_moment_estimate",
    "negmom_bound",
    "pseudo_gap_finite",
    "spectral_report_continuous",
    "spectral_report_finite",
    "tail_frequency",
]
