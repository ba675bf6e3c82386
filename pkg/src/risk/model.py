"""The (P, Q) covariate shift regression model and its training design.

The training sample is a source block X^P_0..X^P_{n_P-1} followed by a target
block X^Q_0..X^Q_{n_Q-1}, each a chain started from its own warm start, with
responses Y_i = f*(X_i) + xi_i drawn on per-block noise streams.
"""

from typing import Annotated, NamedTuple, Union

import numpy as np
import structlog
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.chains.continuous import (
    BetaChain,
    ContinuousKernel,
    EmbeddedTargetChain,
    IndependenceKernel,
    ProductBetaChain,
    sample_continuous_path,
)
from src.chains.finite import FiniteKernel, sample_finite_path, stationary_finite
from src.chains.metric import Metric, MetricSpaceSpec
from src.chains.noise import NoiseSpec, attach_responses
from src.chains.paths import StatePath
from src.chains.rng import Stream, stream_seed
from src.chains.warm_start import WarmStart, resolve_finite_warm_start
from src.estimator.holder import HolderSpec
from src.similarity.rho import Sampler, finite_sampler, stationary_sampler
from src.spectral.gaps import pseudo_gap_finite
from src.spectral.report import spectral_report_continuous

logger = structlog.get_logger(__name__)

KernelSpec = Annotated[
    Union[FiniteKernel, BetaChain, ProductBetaChain, IndependenceKernel, EmbeddedTargetChain],
    Field(discriminator="family"),
]


class BlockConstants(NamedTuple):
    """Mixing and warm-start constants of one training block."""

    pseudo_gap: float
    density_norm: float
    conj_exponent: float


class ShiftModel(BaseModel):
    """A (P, Q)-Markov covariate shift regression model.

    Attributes:
        source: Kernel P generating the first n_P covariates.
        target: Kernel Q generating the last n_Q covariates and the test law.
        n_p: Source block size.
        n_q: Target block size.
        warm_p: Initial law of the source chain.
        warm_q: Initial law of the target chain.
        regression: The regression function f*.
        noise: Response noise.
        metric: Metric of the state space.
    """

    model_config = ConfigDict(frozen=True)

    source: KernelSpec
    target: KernelSpec
    n_p: int = Field(default=0, ge=0)
    n_q: int = Field(default=0, ge=0)
    warm_p: WarmStart = Field(default_factory=WarmStart.at_stationarity)
    warm_q: WarmStart = Field(default_factory=WarmStart.at_stationarity)
    regression: HolderSpec = Field(default_factory=HolderSpec)
    noise: NoiseSpec = Field(default_factory=NoiseSpec)
    metric: Metric = Metric.SUP_NORM

    @model_validator(mode="after")
    def _check(self) -> "ShiftModel":
        if self.n_p + self.n_q == 0:
            raise ValueError("the training sample needs n_P + n_Q >= 1")
        if self.source.dimension != self.target.dimension:
            raise ValueError(
                f"source has dimension {self.source.dimension}, "
                f"target has dimension {self.target.dimension}"
            )
        if self.regression.dimension != self.target.dimension:
            raise ValueError(
                f"regression function has dimension {self.regression.dimension}, "
                f"chains have dimension {self.target.dimension}"
            )
        return self

    @property
    def n(self) -> int:
        return self.n_p + self.n_q

    @property
    def dimension(self) -> int:
        return self.target.dimension

    @property
    def space(self) -> MetricSpaceSpec:
        return MetricSpaceSpec(dimension=self.dimension, metric=self.metric)

    @property
    def finite(self) -> bool:
        """True when both kernels are finite, so rho_h has an exact value."""
        return isinstance(self.source, FiniteKernel) and isinstance(self.target, FiniteKernel)

    def with_sizes(self, n_p: int, n_q: int) -> "ShiftModel":
        return self.model_validate(self.model_dump() | {"n_p": n_p, "n_q": n_q})


def block_constants(kernel: FiniteKernel | ContinuousKernel, start: WarmStart) -> BlockConstants:
    """gamma_ps, the warm-start norm and its conjugate exponent for one block.

    Finite kernels get the exact pseudo spectral gap and exact norm;
    continuous ones the Doeblin lower bound 1/(2 tau) and the asserted norm.
    """
    if isinstance(kernel, FiniteKernel):
        _, resolved = resolve_finite_warm_start(start, stationary_finite(kernel))
        return BlockConstants(
            pseudo_gap_finite(kernel).value, resolved.norm(), resolved.conjugate_exponent
        )
    report = spectral_report_continuous(kernel)
    return BlockConstants(report.pseudo_gap, start.norm(), start.conjugate_exponent)


def sample_block(
    kernel: FiniteKernel | ContinuousKernel,
    start: WarmStart,
    n: int,
    path_seed: np.random.SeedSequence,
    block: str,
) -> StatePath:
    """Covariates of one block started from ``start``."""
    if isinstance(kernel, FiniteKernel):
        mu, _ = resolve_finite_warm_start(start, stationary_finite(kernel))
        return sample_finite_path(kernel, mu, n, path_seed, block)
    return sample_continuous_path(kernel, start, n, path_seed, block)


def training_paths(model: ShiftModel, seed: int, replication: int = 0) -> list[StatePath]:
    """Labelled source and target blocks of one replication, empty blocks omitted.

    Each block draws covariates and noise from its own named stream, so the
    source block is unchanged when only n_Q varies.
    """
    blocks = [
        (model.source, model.warm_p, model.n_p, Stream.PATH_P, Stream.NOISE_P, "P"),
        (model.target, model.warm_q, model.n_q, Stream.PATH_Q, Stream.NOISE_Q, "Q"),
    ]
    paths = []
    for kernel, start, size, path_stream, noise_stream, label in blocks:
        if size == 0:
            continue
        path = sample_block(kernel, start, size, stream_seed(seed, path_stream, replication), label)
        paths.append(
            attach_responses(
                path, model.regression, model.noise, stream_seed(seed, noise_stream, replication)
            )
        )
    return paths


def invariant_sampler(kernel: FiniteKernel | ContinuousKernel) -> Sampler:
    """Draws from pi: exact for finite kernels, long-run chains otherwise."""
    if isinstance(kernel, FiniteKernel):
        return finite_sampler(kernel.coords, stationary_finite(kernel))
    return stationary_sampler(kernel)


def mixture_sampler(model: ShiftModel) -> Sampler:
    """Draws from mu_n = (n_P pi^P + n_Q pi^Q) / n."""
    source = invariant_sampler(model.source)
    target = invariant_sampler(model.target)
    weight = model.n_p / model.n

    def sample(rng: np.random.Generator, size: int) -> NDArray[np.float64]:
        from_source = rng.random(size) < weight
        count = int(from_source.sum())
        out = np.empty((size, model.dimension))
        if count:
            out[from_source] = source(rng, count)
        if size - count:
            out[~from_source] = target(rng, size - count)
        return out

    return sample


class PooledSupport(NamedTuple):
    """Both invariant laws as vectors over the union of the finite state sets."""

    coords: NDArray[np.float64]
    pi_p: NDArray[np.float64]
    pi_q: NDArray[np.float64]

    def mixture(self, n_p: int, n_q: int) -> NDArray[np.float64]:
        return np.asarray((n_p * self.pi_p + n_q * self.pi_q) / (n_p + n_q))


def pooled_support(source: FiniteKernel, target: FiniteKernel) -> PooledSupport:
    """Align pi^P and pi^Q on the union of both state sets."""
    coords, inverse = np.unique(
        np.concatenate([source.coords, target.coords]), axis=0, return_inverse=True
    )
    inverse = np.asarray(inverse).reshape(-1)
    pi_p = np.zeros(coords.shape[0])
    pi_q = np.zeros(coords.shape[0])
    np.add.at(pi_p, inverse[: source.size], stationary_finite(source))
    np.add.at(pi_q, inverse[source.size :], stationary_finite(target))
    return PooledSupport(coords, pi_p, pi_q)


def state_index(kernel: FiniteKernel, x: NDArray[np.float64]) -> int:
    """Index of the state of ``kernel`` located at x."""
    matches = np.flatnonzero(np.all(kernel.coords == np.asarray(x)[None, :], axis=1))
    if matches.size == 0:
        raise ValueError(f"{np.asarray(x).tolist()} is not a state of the kernel")
    return int(matches[0])
