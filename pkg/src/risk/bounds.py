"""Explicit risk upper bounds for the uniform-kernel estimator.

Three bounds are provided:
the general bound L^2 h^{2 beta} + C (pi^Q(|f*|^2) + sigma^2) / n * rho_h(mu_n, pi^Q),
its finite-state form in terms of the effective sample size, and the
alpha-family rate with its constant.
"""

import math

import numpy as np
import structlog
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.chains.continuous import stationary_draws
from src.chains.finite import FiniteKernel, stationary_finite
from src.chains.rng import split_seed
from src.chains.warm_start import WarmStart, resolve_finite_warm_start
from src.estimator.bandwidth import alpha_rate, bandwidth_alpha, bandwidth_finite, effective_sample_size
from src.risk.model import (
    BlockConstants,
    ShiftModel,
    block_constants,
    invariant_sampler,
    mixture_sampler,
    pooled_support,
)
from src.similarity.rho import RhoCurve, rho_exact_curve, rho_mc_curve, rho_mixture
from src.spectral.concentration import MonteCarloEstimate
from src.spectral.gaps import second_eigenvalue_modulus

logger = structlog.get_logger(__name__)

SECOND_MOMENT_DRAWS = 100_000


class PreconditionError(ValueError):
    """Raised when a block is too short for its pseudo spectral gap."""

    pass


class BoundTerms(BaseModel):
    """The risk bound and its two summands.

    Attributes:
        value: bias + stochastic.
        bias: L^2 h^{2 beta}.
        stochastic: C (pi^Q(|f*|^2) + sigma^2) / n * rho.
        constant: The constant C of the stochastic term.
        rho: rho_h(mu_n, pi^Q) used.
        second_moment: pi^Q(|f*|^2) used.
        h: Bandwidth.
    """

    model_config = ConfigDict(frozen=True)

    value: float
    bias: float = Field(ge=0)
    stochastic: float = Field(ge=0)
    constant: float
    rho: float = Field(ge=1)
    second_moment: float = Field(ge=0)
    h: float = Field(gt=0)

    @model_validator(mode="after")
    def _dominates_bias(self) -> "BoundTerms":
        if self.value < self.bias:
            raise ValueError("bound is below its bias summand")
        return self


class FiniteBound(BaseModel):
    """(c^2 Lbar^2 + K max(pi^Q/pi^P) C' (||f*||^2 + sigma^2)) / n_eff."""

    model_config = ConfigDict(frozen=True)

    value: float
    bias: float
    stochastic: float
    constant: float = Field(description="C' from the second eigenvalue moduli")
    bandwidth: float
    n_eff: float
    max_ratio: float
    lipschitz_bar: float
    states: int


class AlphaRateBound(BaseModel):
    """Rate bound L (n_P^{(2 beta + zeta)/(2 beta + alpha)} + n_Q)^{-2 beta/(2 beta + zeta)}."""

    model_config = ConfigDict(frozen=True)

    value: float
    rate: float
    constant: float
    bandwidth: float
    alpha: float
    alpha_prime: float | None = None


def bound_constant(p: BlockConstants, q: BlockConstants) -> float:
    """12 max{3 n_P n_Q (pbar/gamma_P v qbar/gamma_Q), 28 (n_P pbar/gamma_P v n_Q qbar/gamma_Q)}.

    n_P, n_Q here are the warm-start density ratio norms.

    Examples:
        >>> bound_constant(BlockConstants(1.0, 1.0, 1.0), BlockConstants(1.0, 1.0, 1.0))
        336.0
    """
    p_rate = p.conj_exponent / p.pseudo_gap
    q_rate = q.conj_exponent / q.pseudo_gap
    joint = 3.0 * p.density_norm * q.density_norm * max(p_rate, q_rate)
    single = 28.0 * max(p.density_norm * p_rate, q.density_norm * q_rate)
    return 12.0 * max(joint, single)


def model_constants(
    model: ShiftModel,
    gaps: tuple[float, float] | None = None,
    warm_norms: tuple[float, float] | None = None,
) -> tuple[BlockConstants, BlockConstants]:
    """Block constants of both chains, with optional overrides."""
    p = block_constants(model.source, model.warm_p)
    q = block_constants(model.target, model.warm_q)
    if gaps is not None:
        p, q = p._replace(pseudo_gap=gaps[0]), q._replace(pseudo_gap=gaps[1])
    if warm_norms is not None:
        p, q = p._replace(density_norm=warm_norms[0]), q._replace(density_norm=warm_norms[1])
    return p, q


def check_preconditions(model: ShiftModel, p: BlockConstants, q: BlockConstants) -> None:
    """Each non-empty block needs n >= 1 / gamma_ps.

    Raises:
        PreconditionError: Naming the first block that is too short.
    """
    for label, size, constants in (("P", model.n_p, p), ("Q", model.n_q, q)):
        if size == 0:
            continue
        if constants.pseudo_gap <= 0:
            raise PreconditionError(f"{label} block: pseudo spectral gap must be positive")
        if size * constants.pseudo_gap < 1:
            raise PreconditionError(
                f"{label} block: n_{label} = {size} is below 1/gamma_ps = "
                f"{1.0 / constants.pseudo_gap:.6g}"
            )


def target_second_moment(
    model: ShiftModel, seed: int = 0, draws: int = SECOND_MOMENT_DRAWS
) -> MonteCarloEstimate:
    """pi^Q(|f*|^2): an exact sum for finite targets, long-run draws otherwise."""
    if isinstance(model.target, FiniteKernel):
        values = model.regression(model.target.coords) ** 2
        return MonteCarloEstimate(float(stationary_finite(model.target) @ values), 0.0)
    rng = np.random.default_rng(split_seed(seed, 1)[0])
    values = model.regression(stationary_draws(model.target, draws, rng)) ** 2
    return MonteCarloEstimate(
        float(values.mean()), float(values.std(ddof=1) / math.sqrt(draws))
    )


def mixture_rho(
    model: ShiftModel,
    grid: NDArray[np.float64] | list[float],
    seed: int = 0,
    outer_n: int | None = None,
    inner_n: int | None = None,
) -> RhoCurve:
    """rho_h(mu_n, pi^Q) over a grid: exact on finite models, Monte Carlo otherwise."""
    if model.finite:
        assert isinstance(model.source, FiniteKernel) and isinstance(model.target, FiniteKernel)
        support = pooled_support(model.source, model.target)
        return rho_exact_curve(
            support.mixture(model.n_p, model.n_q), support.pi_q, support.coords, grid, model.space
        )
    return rho_mc_curve(
        mixture_sampler(model),
        invariant_sampler(model.target),
        grid,
        outer_n,
        inner_n,
        seed,
        model.space,
    )


def mixture_rho_bound(model: ShiftModel, curve_p: RhoCurve, curve_q: RhoCurve) -> RhoCurve:
    """Plug-in bound on rho_h(mu_n, pi^Q) from the block curves rho_h(pi^P, pi^Q), rho_h(pi^Q, pi^Q)."""
    return rho_mixture(model.n_p, model.n_q, curve_p, curve_q)


def theoretical_upper_bound(
    model: ShiftModel,
    h: float,
    rho_value: float,
    gaps: tuple[float, float] | None = None,
    warm_norms: tuple[float, float] | None = None,
    second_moment: float | None = None,
    seed: int = 0,
) -> BoundTerms:
    """The general risk bound at bandwidth h.

    Args:
        model: Shift model.
        h: Bandwidth.
        rho_value: rho_h(mu_n, pi^Q), exact or estimated.
        gaps: Optional (gamma_ps^P, gamma_ps^Q) overriding the computed gaps.
        warm_norms: Optional warm-start norms overriding the computed ones.
        second_moment: pi^Q(|f*|^2); computed from the model when omitted.
        seed: Seed for the Monte Carlo second moment of continuous targets.

    Raises:
        PreconditionError: If a block is shorter than 1/gamma_ps.
    """
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    p, q = model_constants(model, gaps, warm_norms)
    check_preconditions(model, p, q)
    constant = bound_constant(p, q)
    moment = target_second_moment(model, seed).mean if second_moment is None else second_moment
    f = model.regression
    bias = f.lipschitz**2 * h ** (2.0 * f.beta)
    scale = moment + model.noise.sigma**2
    stochastic = constant * scale / model.n * rho_value if scale > 0 else 0.0
    logger.debug("risk_bound_evaluated", h=h, constant=constant, rho=rho_value)
    return BoundTerms(
        value=bias + stochastic,
        bias=bias,
        stochastic=stochastic,
        constant=constant,
        rho=rho_value,
        second_moment=moment,
        h=h,
    )


def _sup_ratio(start: WarmStart, kernel: FiniteKernel) -> float:
    pi = stationary_finite(kernel)
    mu, _ = resolve_finite_warm_start(start, pi)
    return float(np.max(mu / pi))


def finite_constant(model: ShiftModel) -> float:
    """C' = 12 max{3 k_P k_Q / (1 - (l_P v l_Q)^2), 28 (k_P / (1 - l_P^2) v k_Q / (1 - l_Q^2))}.

    k is max mu/pi and l the second eigenvalue modulus of each kernel.

    Raises:
        PreconditionError: If a kernel has an eigenvalue on the unit circle.
    """
    if not model.finite:
        raise ValueError("the finite-state bound needs finite source and target kernels")
    assert isinstance(model.source, FiniteKernel) and isinstance(model.target, FiniteKernel)
    lam_p = second_eigenvalue_modulus(model.source)
    lam_q = second_eigenvalue_modulus(model.target)
    if max(lam_p, lam_q) >= 1:
        raise PreconditionError("the finite-state bound needs aperiodic kernels")
    kappa_p = _sup_ratio(model.warm_p, model.source)
    kappa_q = _sup_ratio(model.warm_q, model.target)
    joint = 3.0 * kappa_p * kappa_q / (1.0 - max(lam_p, lam_q) ** 2)
    single = 28.0 * max(kappa_p / (1.0 - lam_p**2), kappa_q / (1.0 - lam_q**2))
    return 12.0 * max(joint, single)


def finite_upper_bound(model: ShiftModel, c: float = 0.5) -> FiniteBound:
    """Risk bound of a finite design at h = c min(n_eff^{-1/2}, delta).

    When pi^P misses a target state the source block is dropped and the
    ratio factor is taken as 1.
    """
    constant = finite_constant(model)
    assert isinstance(model.source, FiniteKernel) and isinstance(model.target, FiniteKernel)
    support = pooled_support(model.source, model.target)
    n_eff = effective_sample_size(model.n_p, model.n_q, support.pi_p, support.pi_q)
    distances = model.space.pairwise(support.coords, support.coords)
    np.fill_diagonal(distances, np.inf)
    delta = float(distances.min()) if support.coords.shape[0] > 1 else model.space.diameter
    h = bandwidth_finite(n_eff.value, delta, c)
    values = model.regression(support.coords)
    lipschitz_bar = float(np.ptp(values) / delta)
    ratio = 1.0 if n_eff.source_dropped else n_eff.max_ratio
    sup_sq = float(np.max(np.abs(values))) ** 2
    states = int(support.coords.shape[0])
    bias = c**2 * lipschitz_bar**2 / n_eff.value
    stochastic = states * ratio * constant * (sup_sq + model.noise.sigma**2) / n_eff.value
    return FiniteBound(
        value=bias + stochastic,
        bias=bias,
        stochastic=stochastic,
        constant=constant,
        bandwidth=h,
        n_eff=n_eff.value,
        max_ratio=n_eff.max_ratio,
        lipschitz_bar=lipschitz_bar,
        states=states,
    )


def alpha_rate_constant(
    lipschitz: float,
    alpha: float,
    family_constant: float,
    dimension: int,
    diameter: float,
    risk_constant: float,
    moment_bound: float,
    sigma: float,
) -> float:
    """L^2 + 2 ((1 + 2^d) v C)(1 v D^{alpha v d}) C_risk (M^2 + sigma^2)."""
    return lipschitz**2 + 2.0 * max(1.0 + 2.0**dimension, family_constant) * max(
        1.0, diameter ** max(alpha, dimension)
    ) * risk_constant * (moment_bound**2 + sigma**2)


def alpha_rate_bound(
    model: ShiftModel,
    alpha: float,
    family_constant: float,
    alpha_prime: float | None = None,
    moment_bound: float | None = None,
) -> AlphaRateBound:
    """Risk rate and constant for a pair in an alpha-family.

    ``moment_bound`` bounds pi^Q(|f*|^2) and defaults to ||f*||_inf^2.

    Raises:
        PreconditionError: If a block is too short or h_n exceeds the diameter.
    """
    p, q = model_constants(model)
    check_preconditions(model, p, q)
    f = model.regression
    h = bandwidth_alpha(model.n_p, model.n_q, f.beta, alpha, model.dimension, alpha_prime)
    if h > model.space.diameter:
        raise PreconditionError(f"bandwidth {h:.6g} exceeds the diameter {model.space.diameter}")
    rate = alpha_rate(model.n_p, model.n_q, f.beta, alpha, model.dimension, alpha_prime)
    moment = f.sup_norm() ** 2 if moment_bound is None else moment_bound
    constant = alpha_rate_constant(
        f.lipschitz,
        alpha,
        family_constant,
        model.dimension,
        model.space.diameter,
        bound_constant(p, q),
        moment,
        model.noise.sigma,
    )
    return AlphaRateBound(
        value=constant * rate,
        rate=rate,
        constant=constant,
        bandwidth=h,
        alpha=alpha,
        alpha_prime=alpha_prime,
    )
