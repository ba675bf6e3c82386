"""Continuous-state chain families on [0,1]^d.

Every family is a frozen pydantic model discriminated by ``family`` and
exposes the same surface: a vectorized ``step`` driven by uniforms, its
Doeblin minorization, the minorizing measure, the one-step law at a state
and the support box. Paths are simulated from uniforms only, so a seed
fixes the path bit for bit.
"""

from typing import Annotated, Literal, NamedTuple, Union

import numpy as np
import structlog
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.chains.distributions import (
    BetaDistribution,
    BetaStep,
    Distribution,
    ProductBeta,
    UniformBox,
)
from src.chains.finite import KernelValidationError
from src.chains.metric import Box
from src.chains.paths import SeedLike, StatePath, seed_label
from src.chains.warm_start import WarmStart
from src.config import settings

logger = structlog.get_logger(__name__)


class Minorization(NamedTuple):
    """P^m(x, .) >= epsilon * nu for every x."""

    epsilon: float
    lag: int


def beta_chain_step(x: ArrayLike, gamma: float, u: ArrayLike) -> NDArray[np.float64]:
    """Next state u^{1/(1+gamma+x)}; the conditional law is Beta(1+gamma+x, 1).

    Examples:
        >>> float(beta_chain_step(1.0, 1.0, 0.5))
        0.7937005259840998
    """
    x_arr = np.asarray(x, dtype=float)
    return np.asarray(np.asarray(u, dtype=float) ** (1.0 / (1.0 + gamma + x_arr)))


class ContinuousKernel(BaseModel):
    model_config = ConfigDict(frozen=True)

    @property
    def dimension(self) -> int:
        raise NotImplementedError

    @property
    def noise_dimension(self) -> int:
        raise NotImplementedError

    def step(self, x: NDArray[np.float64], u: NDArray[np.float64]) -> NDArray[np.float64]:
        """Advance states of shape (N, d) with uniforms of shape (N, noise_dimension)."""
        raise NotImplementedError

    def doeblin(self) -> Minorization:
        raise NotImplementedError

    def minorizing_measure(self) -> Distribution:
        raise NotImplementedError

    def kernel_at(self, y: ArrayLike) -> Distribution:
        """One-step law P(y, .) as a distribution descriptor."""
        raise NotImplementedError

    def support(self) -> Box:
        return Box.unit(self.dimension)

    def reference_state(self) -> NDArray[np.float64]:
        """Deterministic start used before burn-in."""
        return np.zeros(self.dimension)


class BetaChain(ContinuousKernel):
    """X_{n+1} = F^{-1}_{gamma + X_n}(U_n) on [0,1]."""

    family: Literal["beta"] = "beta"
    gamma: float = Field(default=0.0, ge=0, description="Base parameter gamma")

    @property
    def dimension(self) -> int:
        return 1

    @property
    def noise_dimension(self) -> int:
        return 1

    def step(self, x: NDArray[np.float64], u: NDArray[np.float64]) -> NDArray[np.float64]:
        return beta_chain_step(x, self.gamma, u)

    def doeblin(self) -> Minorization:
        return Minorization((1.0 + self.gamma) / (2.0 + self.gamma), 1)

    def minorizing_measure(self) -> Distribution:
        return BetaDistribution(shape=2.0 + self.gamma)

    def kernel_at(self, y: ArrayLike) -> Distribution:
        return BetaStep(gamma=self.gamma, state=float(np.asarray(y, dtype=float).reshape(-1)[0]))


class Modulation(BaseModel):
    """Modulation functions iota_i with values in [floor, 1].

    ``linear``: iota_i(x) = floor + (1 - floor) x_i.
    ``constant``: iota_i(x) = level.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["linear", "constant"] = "linear"
    floor: float = Field(default=1.0, gt=0, le=1, description="Lower bound epsilon of iota_i")
    level: float | None = Field(default=None, gt=0, le=1)

    @model_validator(mode="after")
    def _check(self) -> "Modulation":
        if self.kind == "constant" and self.level is not None and self.level < self.floor:
            raise ValueError("constant modulation level must lie in [floor, 1]")
        return self

    @property
    def minimum(self) -> float:
        """Smallest value the modulation attains."""
        if self.kind == "constant":
            return self.level if self.level is not None else self.floor
        return self.floor

    def __call__(self, x: NDArray[np.float64], active: int) -> NDArray[np.float64]:
        coords = x[..., :active]
        if self.kind == "constant":
            return np.full(coords.shape, self.minimum)
        return np.asarray(self.floor + (1.0 - self.floor) * coords)


class ProductBetaChain(ContinuousKernel):
    """Independent Beta(gamma_i iota_i(x), 1) coordinates, zero past the active ones."""

    family: Literal["product-beta"] = "product-beta"
    gammas: list[float] = Field(min_length=1, description="Coordinate parameters gamma_i in (0,1]")
    modulation: Modulation = Field(default_factory=Modulation)
    ambient_dimension: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check(self) -> "ProductBetaChain":
        if any(not 0 < g <= 1 for g in self.gammas):
            raise KernelValidationError("product-beta gammas must lie in (0, 1]")
        if self.ambient_dimension is not None and self.ambient_dimension < len(self.gammas):
            raise KernelValidationError("ambient_dimension smaller than the active dimension")
        return self

    @property
    def active_dimension(self) -> int:
        return len(self.gammas)

    @property
    def dimension(self) -> int:
        return self.ambient_dimension or self.active_dimension

    @property
    def noise_dimension(self) -> int:
        return self.active_dimension

    def shapes_at(self, x: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.asarray(self.gammas) * self.modulation(x, self.active_dimension)

    def step(self, x: NDArray[np.float64], u: NDArray[np.float64]) -> NDArray[np.float64]:
        active = u ** (1.0 / self.shapes_at(x))
        padding = np.zeros(x.shape[:-1] + (self.dimension - self.active_dimension,))
        return np.concatenate([active, padding], axis=-1)

    def doeblin(self) -> Minorization:
        return Minorization(self.modulation.minimum**self.active_dimension, 1)

    def minorizing_measure(self) -> Distribution:
        return ProductBeta(shapes=list(self.gammas), ambient_dimension=self.dimension)

    def kernel_at(self, y: ArrayLike) -> Distribution:
        shapes = self.shapes_at(np.asarray(y, dtype=float).reshape(-1))
        return ProductBeta(shapes=shapes.tolist(), ambient_dimension=self.dimension)

    def support(self) -> Box:
        return Box.unit(self.active_dimension, self.dimension)


class IndependenceKernel(ContinuousKernel):
    """P(x, .) = law for every x; the chain is i.i.d. and pi = law."""

    family: Literal["independence"] = "independence"
    law: Distribution

    @property
    def dimension(self) -> int:
        return self.law.dimension

    @property
    def noise_dimension(self) -> int:
        return self.law.noise_dimension

    def step(self, x: NDArray[np.float64], u: NDArray[np.float64]) -> NDArray[np.float64]:
        return self.law.transform(u)

    def doeblin(self) -> Minorization:
        return Minorization(1.0, 1)

    def minorizing_measure(self) -> Distribution:
        return self.law

    def kernel_at(self, y: ArrayLike) -> Distribution:
        return self.law

    def support(self) -> Box:
        return self.law.support()

    def reference_state(self) -> NDArray[np.float64]:
        return np.asarray(self.law.support().lower, dtype=float)


InnerKernelSpec = Annotated[
    Union[BetaChain, ProductBetaChain, IndependenceKernel],
    Field(discriminator="family"),
]


def pad_distribution(law: Distribution, ambient_dimension: int) -> Distribution:
    """The law of (X, 0, ..., 0) in R^ambient for X ~ law."""
    if law.dimension == ambient_dimension:
        return law
    if law.dimension > ambient_dimension:
        raise KernelValidationError(
            f"cannot embed a {law.dimension}-dimensional law into dimension {ambient_dimension}"
        )
    if isinstance(law, ProductBeta):
        return law.model_copy(update={"ambient_dimension": ambient_dimension})
    if isinstance(law, BetaDistribution | BetaStep):
        return ProductBeta(shapes=[law.shape], ambient_dimension=ambient_dimension)
    padding = [0.0] * (ambient_dimension - law.dimension)
    return UniformBox(lower=[*law.lower, *padding], upper=[*law.upper, *padding])


class EmbeddedTargetChain(ContinuousKernel):
    """An inner chain on [0,1]^{d_Q} embedded as [0,1]^{d_Q} x {0}^{d - d_Q}."""

    family: Literal["embedded"] = "embedded"
    inner: InnerKernelSpec
    ambient_dimension: int = Field(ge=1)

    @model_validator(mode="after")
    def _check(self) -> "EmbeddedTargetChain":
        if self.inner.dimension > self.ambient_dimension:
            raise KernelValidationError(
                f"inner chain has dimension {self.inner.dimension}, "
                f"ambient dimension is {self.ambient_dimension}"
            )
        return self

    @property
    def target_dimension(self) -> int:
        return self.inner.dimension

    @property
    def dimension(self) -> int:
        return self.ambient_dimension

    @property
    def noise_dimension(self) -> int:
        return self.inner.noise_dimension

    def step(self, x: NDArray[np.float64], u: NDArray[np.float64]) -> NDArray[np.float64]:
        inner = self.inner.step(x[..., : self.target_dimension], u)
        padding = np.zeros(x.shape[:-1] + (self.ambient_dimension - self.target_dimension,))
        return np.concatenate([inner, padding], axis=-1)

    def doeblin(self) -> Minorization:
        return self.inner.doeblin()

    def minorizing_measure(self) -> Distribution:
        return pad_distribution(self.inner.minorizing_measure(), self.ambient_dimension)

    def kernel_at(self, y: ArrayLike) -> Distribution:
        inner_state = np.asarray(y, dtype=float).reshape(-1)[: self.target_dimension]
        return pad_distribution(self.inner.kernel_at(inner_state), self.ambient_dimension)

    def support(self) -> Box:
        inner = self.inner.support()
        padding = [0.0] * (self.ambient_dimension - self.target_dimension)
        return Box(lower=[*inner.lower, *padding], upper=[*inner.upper, *padding])

    def reference_state(self) -> NDArray[np.float64]:
        padding = np.zeros(self.ambient_dimension - self.target_dimension)
        return np.concatenate([self.inner.reference_state(), padding])


ContinuousKernelSpec = Annotated[
    Union[BetaChain, ProductBetaChain, IndependenceKernel, EmbeddedTargetChain],
    Field(discriminator="family"),
]


def _run(
    spec: ContinuousKernel, x: NDArray[np.float64], steps: int, rng: np.random.Generator
) -> NDArray[np.float64]:
    for _ in range(steps):
        x = spec.step(x, rng.random(x.shape[:-1] + (spec.noise_dimension,)))
    return x


def initial_state(
    spec: ContinuousKernel, init: ArrayLike | WarmStart, rng: np.random.Generator
) -> NDArray[np.float64]:
    """Resolve a point or warm start into X_0, drawing from ``rng`` when needed."""
    if isinstance(init, WarmStart):
        if init.point is not None:
            x0 = np.asarray(init.point, dtype=float)
        elif init.distribution is not None:
            x0 = init.distribution.sample(rng, 1)[0]
        elif init.stationary:
            x0 = _run(spec, spec.reference_state()[None, :], settings.burn_in, rng)[0]
        else:
            raise KernelValidationError("continuous chains cannot start from a finite vector")
    else:
        x0 = np.asarray(init, dtype=float).reshape(-1)
    if x0.shape != (spec.dimension,):
        raise KernelValidationError(
            f"initial state has dimension {x0.size}, chain has dimension {spec.dimension}"
        )
    if not spec.support().contains(x0):
        raise KernelValidationError(f"initial state {x0.tolist()} lies outside the state space")
    return x0


def sample_continuous_path(
    spec: ContinuousKernel,
    init: ArrayLike | WarmStart,
    n: int,
    seed: SeedLike,
    block: str = "P",
) -> StatePath:
    """Sample X_0..X_{n-1} of a continuous-state chain.

    Args:
        spec: Kernel family.
        init: A point of the state space or a warm start. A stationary warm
            start runs ``settings.burn_in`` steps from the reference state.
        n: Path length (>= 1).
        seed: Integer seed or SeedSequence.
        block: Block label stored on the path.

    Returns:
        The sampled StatePath.

    Raises:
        KernelValidationError: If ``init`` does not match the state space.
    """
    if n < 1:
        raise ValueError("path length must be at least 1")
    rng = np.random.default_rng(seed)
    states = np.empty((n, spec.dimension))
    states[0] = initial_state(spec, init, rng)
    uniforms = rng.random((n - 1, spec.noise_dimension))
    for i in range(1, n):
        states[i] = spec.step(states[i - 1 : i], uniforms[i - 1 : i])[0]
    return StatePath(states=states, seed=seed_label(seed), block=block)


def stationary_draws(
    spec: ContinuousKernel,
    size: int,
    rng: np.random.Generator,
    burn_in: int | None = None,
) -> NDArray[np.float64]:
    """Approximate pi by the endpoints of ``size`` independent chains after burn-in.

    Independence kernels return exact draws from their law.
    """
    if isinstance(spec, IndependenceKernel):
        return spec.law.sample(rng, size)
    steps = settings.burn_in if burn_in is None else burn_in
    start = np.broadcast_to(spec.reference_state(), (size, spec.dimension)).copy()
    return _run(spec, start, steps, rng)


def surrogate_stationary_sample(
    spec: ContinuousKernel,
    size: int,
    rng: np.random.Generator,
    burn_in: int | None = None,
    thinning: int | None = None,
) -> NDArray[np.float64]:
    """Every ``thinning``-th state of one chain after burn-in, ``size`` states in total."""
    steps = settings.burn_in if burn_in is None else burn_in
    thin = settings.thinning if thinning is None else thinning
    x = _run(spec, spec.reference_state()[None, :], steps, rng)
    uniforms = rng.random((size * thin, spec.noise_dimension))
    out = np.empty((size, spec.dimension))
    for i in range(size * thin):
        x = spec.step(x, uniforms[i : i + 1])
        if (i + 1) % thin == 0:
            out[(i + 1) // thin - 1] = x[0]
    return out


def continue_chains(
    spec: ContinuousKernel, starts: NDArray[np.float64], m: int, rng: np.random.Generator
) -> NDArray[np.float64]:
    """States m steps after each row of ``starts``, one independent continuation per row."""
    return _run(spec, np.array(starts, dtype=float), m, rng)
