"""Distribution descriptors on [0,1]^d.

Descriptors are serializable laws used as initial distributions, as the law
of an independence kernel, as minorizing measures and as inputs to the
closed-form ball probabilities in ``src.similarity.balls``. Every descriptor
is sampled by inverse CDF from uniforms, so a fixed uniform stream gives a
fixed draw.
"""

from typing import Annotated, Literal

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.chains.metric import Box


class _Descriptor(BaseModel):
    model_config = ConfigDict(frozen=True)

    @property
    def dimension(self) -> int:
        raise NotImplementedError

    @property
    def noise_dimension(self) -> int:
        """Uniform variates consumed per draw."""
        raise NotImplementedError

    def transform(self, u: NDArray[np.float64]) -> NDArray[np.float64]:
        """Map uniforms of shape (..., noise_dimension) to points of shape (..., dimension)."""
        raise NotImplementedError

    def support(self) -> Box:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> NDArray[np.float64]:
        """Draw ``size`` independent points, shape (size, dimension)."""
        return self.transform(rng.random((size, self.noise_dimension)))


class BetaDistribution(_Descriptor):
    """Beta(a, 1) on [0,1]: CDF t^a."""

    kind: Literal["beta"] = "beta"
    shape: float = Field(gt=0, description="Shape a of Beta(a, 1)")

    @property
    def dimension(self) -> int:
        return 1

    @property
    def noise_dimension(self) -> int:
        return 1

    def transform(self, u: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.asarray(u ** (1.0 / self.shape))

    def support(self) -> Box:
        return Box.unit(1)


class ProductBeta(_Descriptor):
    """Product of Beta(a_i, 1) laws, zero-padded up to an ambient dimension."""

    kind: Literal["product-beta"] = "product-beta"
    shapes: list[float] = Field(min_length=1, description="Shapes a_i of the active coordinates")
    ambient_dimension: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check(self) -> "ProductBeta":
        if any(a <= 0 for a in self.shapes):
            raise ValueError("product-beta shapes must be positive")
        if self.ambient_dimension is not None and self.ambient_dimension < len(self.shapes):
            raise ValueError("ambient_dimension smaller than the number of shapes")
        return self

    @property
    def active_dimension(self) -> int:
        return len(self.shapes)

    @property
    def dimension(self) -> int:
        return self.ambient_dimension or self.active_dimension

    @property
    def noise_dimension(self) -> int:
        return self.active_dimension

    def transform(self, u: NDArray[np.float64]) -> NDArray[np.float64]:
        active = u ** (1.0 / np.asarray(self.shapes))
        padding = np.zeros(u.shape[:-1] + (self.dimension - self.active_dimension,))
        return np.concatenate([active, padding], axis=-1)

    def support(self) -> Box:
        return Box.unit(self.active_dimension, self.dimension)


class UniformBox(_Descriptor):
    """Uniform law on a box; degenerate sides are point masses."""

    kind: Literal["uniform-box"] = "uniform-box"
    lower: list[float] = Field(default_factory=lambda: [0.0])
    upper: list[float] = Field(default_factory=lambda: [1.0])

    @model_validator(mode="after")
    def _check(self) -> "UniformBox":
        Box(lower=self.lower, upper=self.upper)
        return self

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def noise_dimension(self) -> int:
        return len(self.lower)

    def transform(self, u: NDArray[np.float64]) -> NDArray[np.float64]:
        lower = np.asarray(self.lower)
        return np.asarray(lower + u * (np.asarray(self.upper) - lower))

    def support(self) -> Box:
        return Box(lower=self.lower, upper=self.upper)


class BetaStep(_Descriptor):
    """One-step law Q(y, .) = Beta(1 + gamma + y, 1) of a beta chain at state y."""

    kind: Literal["beta-step"] = "beta-step"
    gamma: float = Field(default=0.0, ge=0)
    state: float = Field(default=0.0, ge=0, le=1)

    @property
    def shape(self) -> float:
        return 1.0 + self.gamma + self.state

    @property
    def dimension(self) -> int:
        return 1

    @property
    def noise_dimension(self) -> int:
        return 1

    def transform(self, u: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.asarray(u ** (1.0 / self.shape))

    def support(self) -> Box:
        return Box.unit(1)


Distribution = Annotated[
    BetaDistribution | ProductBeta | UniformBox | BetaStep,
    Field(discriminator="kind"),
]
