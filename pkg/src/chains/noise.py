"""Conditional noise xi_i and response generation Y_i = f*(X_i) + xi_i."""

import math
from collections.abc import Callable
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

from src.chains.paths import SeedLike, StatePath

RegressionFunction = Callable[[NDArray[np.float64]], NDArray[np.float64]]

_SQRT3 = math.sqrt(3.0)


class NoiseSpec(BaseModel):
    """Noise xi = scale(X) * Z with E[Z] = 0 and E[Z^2] = 1.

    Attributes:
        sigma: Cap on the conditional standard deviation.
        shape: Law of Z, standard Gaussian or uniform on [-sqrt(3), sqrt(3)].
        scale: ``constant`` (scale = sigma) or ``state`` (scale = sigma * ||x||_inf,
            which stays below sigma on [0,1]^d).
        subgaussian_constant: zeta for the prediction-error envelope; defaults
            to the sub-Gaussian parameter of Z.
    """

    model_config = ConfigDict(frozen=True)

    sigma: float = Field(default=0.0, ge=0, description="Conditional standard deviation cap")
    shape: Literal["gaussian", "bounded-uniform"] = "gaussian"
    scale: Literal["constant", "state"] = "constant"
    subgaussian_constant: float | None = Field(default=None, gt=0)

    @property
    def zeta(self) -> float:
        if self.subgaussian_constant is not None:
            return self.subgaussian_constant
        return 1.0 if self.shape == "gaussian" else _SQRT3

    def scale_at(self, states: NDArray[np.float64]) -> NDArray[np.float64]:
        if self.scale == "constant":
            return np.full(states.shape[0], self.sigma)
        return np.asarray(self.sigma * np.abs(states).max(axis=-1))

    def draw(self, states: NDArray[np.float64], rng: np.random.Generator) -> NDArray[np.float64]:
        """One noise value per row of ``states``."""
        size = states.shape[0]
        if self.shape == "gaussian":
            z = rng.standard_normal(size)
        else:
            z = rng.uniform(-_SQRT3, _SQRT3, size)
        return np.asarray(self.scale_at(states) * z)


def attach_responses(
    path: StatePath, f_star: RegressionFunction, noise: NoiseSpec, seed: SeedLike
) -> StatePath:
    """Return a copy of ``path`` with responses f*(X_i) + xi_i.

    The caller passes the noise stream of the path's block, so P- and
    Q-block noise never share draws.
    """
    signal = np.asarray(f_star(path.states), dtype=float)
    if noise.sigma == 0:
        return path.with_responses(signal)
    return path.with_responses(signal + noise.draw(path.states, np.random.default_rng(seed)))
