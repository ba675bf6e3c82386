"""Initial laws of the source and target chains."""

import math

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.chains.distributions import Distribution


def conjugate_exponent(p: float) -> float:
    """Conjugate exponent p/(p-1) of p in (1, inf]; 1 for p = inf."""
    if p <= 1:
        raise ValueError(f"exponent must exceed 1, got {p}")
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


class WarmStart(BaseModel):
    """Initial law mu with the L^p(pi) norm of its density ratio.

    Exactly one of ``stationary``, ``initial`` (finite probability vector),
    ``point`` or ``distribution`` describes the law. For finite chains the
    norm is computed exactly by :func:`resolve_finite_warm_start`; for
    continuous chains a non-stationary start carries a user-asserted norm.
    """

    model_config = ConfigDict(frozen=True)

    stationary: bool = False
    initial: list[float] | None = None
    point: list[float] | None = None
    distribution: Distribution | None = None
    exponent: float = Field(default=math.inf, gt=1, description="Exponent p of the L^p(pi) norm")
    density_ratio_norm: float | None = Field(
        default=None, ge=1, description="||d mu / d pi||_{L^p(pi)} (>= 1 by Jensen)"
    )
    computed: bool = Field(default=False, description="Norm computed rather than asserted")

    @model_validator(mode="after")
    def _one_law(self) -> "WarmStart":
        given = [
            self.stationary,
            self.initial is not None,
            self.point is not None,
            self.distribution is not None,
        ]
        if sum(given) != 1:
            raise ValueError(
                "warm start needs exactly one of stationary, initial, point, distribution"
            )
        if self.stationary and self.density_ratio_norm not in (None, 1.0):
            raise ValueError("a stationary start has density ratio norm exactly 1")
        if self.initial is not None:
            weights = np.asarray(self.initial, dtype=float)
            if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
                raise ValueError("initial must be a probability vector")
        return self

    @classmethod
    def at_stationarity(cls) -> "WarmStart":
        return cls(stationary=True)

    @property
    def conjugate_exponent(self) -> float:
        return 1.0 if self.stationary else conjugate_exponent(self.exponent)

    @property
    def asserted(self) -> bool:
        """True when the norm is a user-supplied value rather than derived."""
        return not self.stationary and not self.computed and self.density_ratio_norm is not None

    def norm(self) -> float:
        """The density ratio norm used in bounds.

        Raises:
            ValueError: If the start is not stationary and no norm is known.
        """
        if self.stationary:
            return 1.0
        if self.density_ratio_norm is None:
            raise ValueError(
                "density_ratio_norm must be asserted for a non-stationary continuous start"
            )
        return self.density_ratio_norm


def density_ratio_norm(mu: ArrayLike, pi: ArrayLike, exponent: float) -> float:
    """L^p(pi) norm of the finite density ratio mu/pi."""
    ratio = np.asarray(mu, dtype=float) / np.asarray(pi, dtype=float)
    if math.isinf(exponent):
        return float(ratio.max())
    return float(np.sum(np.asarray(pi) * ratio**exponent) ** (1.0 / exponent))


def resolve_finite_warm_start(start: WarmStart, pi: ArrayLike) -> tuple[NDArray[np.float64], WarmStart]:
    """Initial vector and the warm start with its exact norm filled in.

    Raises:
        ValueError: If the start is not expressible on a finite chain.
    """
    pi_vec = np.asarray(pi, dtype=float)
    if start.stationary:
        return pi_vec, start
    if start.initial is None:
        raise ValueError("finite chains take a stationary start or an initial vector")
    mu = np.asarray(start.initial, dtype=float)
    if mu.shape != pi_vec.shape:
        raise ValueError(f"initial vector has {mu.size} entries, chain has {pi_vec.size} states")
    norm = max(1.0, density_ratio_norm(mu, pi_vec, start.exponent))
    return mu, start.model_copy(update={"density_ratio_norm": norm, "computed": True})
