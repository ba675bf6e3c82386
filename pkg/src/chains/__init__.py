"""Markov chain families, warm starts, noise and path sampling.

This package defines every chain used by the toolkit: finite transition
matrices, beta chains, product-beta chains, independence kernels and
targets embedded in a lower-dimensional face of the cube.
"""

from src.chains.continuous import (
    BetaChain,
    ContinuousKernel,
    ContinuousKernelSpec,
    EmbeddedTargetChain,
    IndependenceKernel,
    Minorization,
    Modulation,
    ProductBetaChain,
    beta_chain_step,
    sample_continuous_path,
    stationary_draws,
    surrogate_stationary_sample,
)
from src.chains.distributions import (
    BetaDistribution,
    BetaStep,
    Distribution,
    ProductBeta,
    UniformBox,
)
from src.chains.finite import (
    FiniteKernel,
    KernelValidationError,
    categorical_draws,
    is_irreducible,
    period,
    sample_finite_path,
    stationary_finite,
)
from src.chains.metric import Box, Metric, MetricSpaceSpec
from src.chains.noise import NoiseSpec, attach_responses
from src.chains.paths import StatePath, path_rows
from src.chains.rng import Stream, stream_rng, stream_seed
from src.chains.warm_start import WarmStart, conjugate_exponent

__all__ = [
    "BetaChain",
    "BetaDistribution",
    "BetaStep",
    "Box",
    "ContinuousKernel",
    "ContinuousKernelSpec",
    "Distribution",
    "EmbeddedTargetChain",
    "FiniteKernel",
    "IndependenceKernel",
    "KernelValidationError",
    "Metric",
    "MetricSpaceSpec",
    "Minorization",
    "Modulation",
    "NoiseSpec",
    "ProductBeta",
    "ProductBetaChain",
    "StatePath",
    "Stream",
    "UniformBox",
    "WarmStart",
    "attach_responses",
    "beta_chain_step",
    "categorical_draws",
    "conjugate_exponent",
    "is_irreducible",
    "path_rows",
    "period",
    "sample_continuous_path",
    "sample_finite_path",
    "stationary_draws",
    "stationary_finite",
    "stream_rng",
    "stream_seed",
    "surrogate_stationary_sample",
]
