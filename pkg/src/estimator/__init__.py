"""Uniform-kernel Nadaraya-Watson estimation.

Fitting and prediction on closed metric balls, the bandwidth rules for
shifted and unshifted designs, and the Holder test-function library.
"""

from src.estimator.bandwidth import (
    BandwidthError,
    BandwidthRule,
    EffectiveSampleSize,
    alpha_rate,
    bandwidth_alpha,
    bandwidth_finite,
    bandwidth_no_shift,
    effective_sample_size,
)
from src.estimator.holder import HolderAudit, HolderSpec, holder_audit, holder_library
from src.estimator.nadaraya_watson import (
    FittedNW,
    coverage_counts,
    fit_nw,
    fit_nw_paths,
    nw_predict,
)

__all__ = [
    "BandwidthError",
    "BandwidthRule",
    "EffectiveSampleSize",
    "FittedNW",
    "HolderAudit",
    "HolderSpec",
    "alpha_rate",
    "bandwidth_alpha",
    "bandwidth_finite",
    "bandwidth_no_shift",
    "coverage_counts",
    "effective_sample_size",
    "fit_nw",
    "fit_nw_paths",
    "holder_audit",
    "holder_library",
    "nw_predict",
]
