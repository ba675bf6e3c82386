"""Bandwidth rules for the uniform-kernel estimator under covariate shift."""

import math
from typing import Literal, NamedTuple

import numpy as np
import structlog
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, model_validator

logger = structlog.get_logger(__name__)


class BandwidthError(ValueError):
    """Raised when a bandwidth rule lacks or rejects one of its inputs."""

    pass


class EffectiveSampleSize(NamedTuple):
    """n_eff = n_P / max_i(pi^Q_i / pi^P_i) + n_Q.

    ``source_dropped`` is set when pi^P misses a state charged by pi^Q, so the
    source block contributes nothing.
    """

    value: float
    max_ratio: float
    source_dropped: bool


def bandwidth_no_shift(n: int, beta: float, dimension: int) -> float:
    """h = n^{-1/(2 beta + d)}, the minimax choice without shift."""
    if n < 1:
        raise BandwidthError("sample size must be at least 1")
    return float(n ** (-1.0 / (2.0 * beta + dimension)))


def shift_exponent(alpha: float, dimension: int, alpha_prime: float | None = None) -> float:
    """zeta = d when alpha >= d, alpha' otherwise.

    Raises:
        BandwidthError: If alpha < d and alpha' is missing or exceeds alpha.
    """
    if alpha >= dimension:
        return float(dimension)
    if alpha_prime is None:
        raise BandwidthError(f"alpha = {alpha} < d = {dimension} requires alpha_prime")
    if alpha_prime > alpha:
        raise BandwidthError(f"alpha_prime = {alpha_prime} exceeds alpha = {alpha}")
    return float(alpha_prime)


def bandwidth_alpha(
    n_p: int,
    n_q: int,
    beta: float,
    alpha: float,
    dimension: int,
    alpha_prime: float | None = None,
) -> float:
    """h = (n_Q + n_P^{(2 beta + zeta)/(2 beta + alpha)})^{-1/(2 beta + zeta)}.

    Examples:
        >>> round(bandwidth_alpha(10_000, 0, 1.0, 2.0, 1), 12)
        0.1
    """
    if n_p < 0 or n_q < 0 or n_p + n_q == 0:
        raise BandwidthError("block sizes must be non-negative with a positive total")
    if not 0 < beta <= 1:
        raise BandwidthError(f"Holder exponent must lie in (0, 1], got {beta}")
    zeta = shift_exponent(alpha, dimension, alpha_prime)
    pooled = n_q + n_p ** ((2.0 * beta + zeta) / (2.0 * beta + alpha))
    return float(pooled ** (-1.0 / (2.0 * beta + zeta)))


def alpha_rate(
    n_p: int,
    n_q: int,
    beta: float,
    alpha: float,
    dimension: int,
    alpha_prime: float | None = None,
) -> float:
    """Risk rate (n_P^{(2 beta + zeta)/(2 beta + alpha)} + n_Q)^{-2 beta/(2 beta + zeta)}."""
    h = bandwidth_alpha(n_p, n_q, beta, alpha, dimension, alpha_prime)
    return h ** (2.0 * beta)


def effective_sample_size(
    n_p: int, n_q: int, pi_p: ArrayLike, pi_q: ArrayLike
) -> EffectiveSampleSize:
    """Effective sample size of a finite covariate shift design.

    Examples:
        >>> effective_sample_size(100, 10, [0.25, 0.75], [0.5, 0.5]).value
        60.0
    """
    p = np.asarray(pi_p, dtype=float)
    q = np.asarray(pi_q, dtype=float)
    if p.shape != q.shape:
        raise BandwidthError("invariant laws must share the state space")
    charged = q > 0
    if np.any(p[charged] <= 0):
        logger.warning("effective_sample_size_source_dropped", n_p=n_p, n_q=n_q)
        return EffectiveSampleSize(float(n_q), math.inf, True)
    max_ratio = float(np.max(q[charged] / p[charged]))
    return EffectiveSampleSize(n_p / max_ratio + n_q, max_ratio, False)


def bandwidth_finite(n_eff: float, delta: float, c: float = 0.5) -> float:
    """h = c * min(n_eff^{-1/2}, delta) for chains on finitely many points.

    Raises:
        BandwidthError: If c is outside (0, 1) or n_eff is not positive.
    """
    if not 0 < c < 1:
        raise BandwidthError(f"c must lie in (0, 1), got {c}")
    if n_eff <= 0:
        raise BandwidthError("effective sample size must be positive")
    return c * min(n_eff**-0.5, delta)


class BandwidthRule(BaseModel):
    """Bandwidth selection as configured for an experiment.

    ``no-shift`` uses n = n_P + n_Q; ``alpha`` needs alpha (and alpha' below d);
    ``finite`` needs the effective sample size and the minimum state gap;
    ``fixed`` returns ``value``.
    """

    model_config = ConfigDict(frozen=True)

    rule: Literal["no-shift", "alpha", "finite", "fixed"] = "no-shift"
    beta: float = Field(default=1.0, gt=0, le=1)
    alpha: float | None = Field(default=None, ge=0)
    alpha_prime: float | None = Field(default=None, ge=0)
    c: float = Field(default=0.5, gt=0, lt=1)
    value: float | None = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _check(self) -> "BandwidthRule":
        if self.rule == "alpha" and self.alpha is None:
            raise ValueError("the alpha rule needs alpha")
        if self.rule == "fixed" and self.value is None:
            raise ValueError("the fixed rule needs value")
        return self

    def select(
        self,
        n_p: int,
        n_q: int,
        dimension: int,
        n_eff: float | None = None,
        delta: float | None = None,
    ) -> float:
        """Bandwidth for block sizes (n_P, n_Q) in dimension d."""
        if self.rule == "fixed":
            assert self.value is not None
            return self.value
        if self.rule == "no-shift":
            return bandwidth_no_shift(n_p + n_q, self.beta, dimension)
        if self.rule == "alpha":
            assert self.alpha is not None
            return bandwidth_alpha(n_p, n_q, self.beta, self.alpha, dimension, self.alpha_prime)
        if n_eff is None or delta is None:
            raise BandwidthError("the finite rule needs n_eff and the minimum state gap")
        return bandwidth_finite(n_eff, delta, self.c)
