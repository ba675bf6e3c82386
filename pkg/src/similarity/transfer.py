"""Kernel transfer exponents: grid verification and the analytic library.

(P, Q) has transfer exponent gamma with constant C and radius h_bar when
nu^P(B(x, h)) >= C (h/h_bar)^gamma Q^{m_Q}(y, B(x, h)) for x, y in the target
support and 0 < h <= h_bar, nu^P being the minorizing measure of P.
"""

import math
from typing import Literal, NamedTuple

import numpy as np
import structlog
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field

from src.similarity.balls import BallProbability, KernelBallProbability
from src.similarity.families import AlphaMembership

logger = structlog.get_logger(__name__)

MARGIN_TOLERANCE = 1e-12


class TransferWitness(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: list[float]
    y: list[float]
    h: float


class TransferExponentCheck(BaseModel):
    """Outcome of a grid search for the worst transfer margin.

    Attributes:
        worst_margin: min of nu^P(B(x,h)) - C (h/h_bar)^gamma Q(y, B(x,h)).
        witness: The triple attaining ``worst_margin``.
        worst_ratio: min of nu^P(B(x,h)) / (C (h/h_bar)^gamma Q(y, B(x,h)))
            over triples with positive Q mass; below 1 means failure too.
        relative_witness: The triple attaining ``worst_ratio``.
    """

    model_config = ConfigDict(frozen=True)

    gamma: float = Field(ge=0)
    constant: float = Field(gt=0)
    radius: float = Field(gt=0)
    m_q: int = Field(default=1, ge=1)
    worst_margin: float
    witness: TransferWitness
    worst_ratio: float
    relative_witness: TransferWitness | None = None
    verdict: Literal["pass", "fail"]
    grid_sizes: tuple[int, int, int]

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


class TransferParameters(NamedTuple):
    """Analytic (gamma, C, h_bar) for a kernel pair."""

    gamma: float
    constant: float
    radius: float


def _as_points(values: ArrayLike) -> NDArray[np.float64]:
    points = np.asarray(values, dtype=float)
    return points[:, None] if points.ndim == 1 else points


def verify_transfer_exponent(
    nu_ball: BallProbability,
    q_ball: KernelBallProbability,
    gamma: float,
    constant: float,
    radius: float,
    x_grid: ArrayLike,
    y_grid: ArrayLike,
    h_grid: ArrayLike,
    m_q: int = 1,
) -> TransferExponentCheck:
    """Search the (x, y, h) grid for the worst transfer margin.

    Args:
        nu_ball: (x, h) -> nu^P(B(x, h)), vectorized over broadcast arrays.
        q_ball: (y, x, h) -> Q^{m_Q}(y, B(x, h)) for one state y.
        gamma: Candidate exponent.
        constant: Candidate constant C.
        radius: h_bar; every h must lie in (0, h_bar].
        x_grid: Ball centers in the target support, shape (Nx,) or (Nx, d).
        y_grid: Kernel states in the target support.
        h_grid: Bandwidths.
        m_q: Lag of the target kernel the ball function represents.

    Returns:
        The check; it passes iff the worst margin is at least -1e-12.
    """
    xs = _as_points(x_grid)
    ys = _as_points(y_grid)
    hs = np.asarray(h_grid, dtype=float).reshape(-1)
    if hs.size == 0 or np.any(hs <= 0) or np.any(hs > radius * (1 + 1e-12)):
        raise ValueError("bandwidths must lie in (0, h_bar]")

    centers = xs[:, None, :]
    bandwidths = hs[None, :]
    nu = np.asarray(nu_ball(centers, bandwidths), dtype=float)
    scale = constant * (bandwidths / radius) ** gamma

    worst_margin = math.inf
    worst_ratio = math.inf
    margin_at = (0, 0, 0)
    ratio_at: tuple[int, int, int] | None = None
    for j, y in enumerate(ys):
        required = scale * np.asarray(q_ball(y, centers, bandwidths), dtype=float)
        margin = nu - required
        i, k = np.unravel_index(int(np.argmin(margin)), margin.shape)
        if margin[i, k] < worst_margin:
            worst_margin = float(margin[i, k])
            margin_at = (int(i), j, int(k))
        positive = required > 0
        if np.any(positive):
            ratio = np.where(positive, nu / np.where(positive, required, 1.0), np.inf)
            i, k = np.unravel_index(int(np.argmin(ratio)), ratio.shape)
            if ratio[i, k] < worst_ratio:
                worst_ratio = float(ratio[i, k])
                ratio_at = (int(i), j, int(k))

    def witness(at: tuple[int, int, int]) -> TransferWitness:
        return TransferWitness(x=xs[at[0]].tolist(), y=ys[at[1]].tolist(), h=float(hs[at[2]]))

    verdict: Literal["pass", "fail"] = "pass" if worst_margin >= -MARGIN_TOLERANCE else "fail"
    logger.debug(
        "verify_transfer_exponent",
        gamma=gamma,
        constant=constant,
        worst_margin=worst_margin,
        worst_ratio=worst_ratio,
        verdict=verdict,
    )
    return TransferExponentCheck(
        gamma=gamma,
        constant=constant,
        radius=radius,
        m_q=m_q,
        worst_margin=worst_margin,
        witness=witness(margin_at),
        worst_ratio=worst_ratio,
        relative_witness=witness(ratio_at) if ratio_at is not None else None,
        verdict=verdict,
        grid_sizes=(xs.shape[0], ys.shape[0], hs.size),
    )


def transfer_to_alpha(
    gamma: float,
    target_dimension: int,
    covering_constant: float,
    constant: float,
    epsilon_p: float,
    dimension: int,
) -> tuple[AlphaMembership, AlphaMembership]:
    """alpha-family membership implied by a transfer exponent with radius D.

    Args:
        gamma: Transfer exponent.
        target_dimension: d_Q, the covering dimension of the target support.
        covering_constant: k_Q with N(eps) <= (1 + k_Q D / eps)^{d_Q}.
        constant: Transfer constant C.
        epsilon_p: Doeblin mass of the source kernel.
        dimension: Ambient dimension d.

    Returns:
        (membership, fallback). The membership is D(gamma + d_Q, C') when
        gamma + d_Q >= d and D'(gamma + d_Q, d_Q, C') otherwise, with
        C' = (2 k_Q + 1)^{d_Q} / (C eps_P), the denominator capped at 1 in the
        primed case. The fallback D(gamma + d, 9^d / (C eps_P)) always holds.

    Examples:
        >>> transfer_to_alpha(0.0, 2, 1.0, 1.0, 1.0, 2)[0]
        AlphaMembership(alpha=2.0, constant=9.0, alpha_prime=None)
    """
    if gamma < 0 or constant <= 0 or not 0 < epsilon_p <= 1 or covering_constant < 1:
        raise ValueError("transfer_to_alpha needs gamma >= 0, C > 0, eps_P in (0, 1] and k_Q >= 1")
    if not 1 <= target_dimension <= dimension:
        raise ValueError("target dimension must lie in [1, d]")
    alpha = gamma + target_dimension
    covering = (2.0 * covering_constant + 1.0) ** target_dimension
    if alpha >= dimension:
        membership = AlphaMembership(alpha, covering / (constant * epsilon_p))
    else:
        membership = AlphaMembership(
            alpha, covering / min(constant * epsilon_p, 1.0), alpha_prime=float(target_dimension)
        )
    fallback = AlphaMembership(gamma + dimension, 9.0**dimension / (constant * epsilon_p))
    return membership, fallback


def beta_chain_transfer(gamma_p: float, gamma_q: float) -> TransferParameters:
    """Beta chains P, Q on [0,1] with nu^P = Beta(2 + gamma_P, 1).

    The exponent 1 + gamma_P - gamma_Q is the smallest admissible one; at
    x = y = 0 both sides are pure powers of h.
    """
    if gamma_q < 0 or gamma_p <= gamma_q:
        raise ValueError("beta-chain transfer needs 0 <= gamma_Q < gamma_P")
    return TransferParameters(1.0 + gamma_p - gamma_q, (1.0 + gamma_q) / (2.0 + gamma_q), 1.0)


def product_beta_transfer(
    source_gammas: list[float], target_gammas: list[float], epsilon: float
) -> TransferParameters:
    """Product-beta source on [0,1]^d and a product-beta target on the first d_Q coordinates."""
    gp = np.asarray(source_gammas, dtype=float)
    gq = np.asarray(target_gammas, dtype=float)
    if not 0 < epsilon <= 1:
        raise ValueError("modulation floor must lie in (0, 1]")
    return TransferParameters(float(gp.sum() - epsilon * gq.sum()), epsilon**gq.size, 1.0)


def bounded_ratio_transfer(ratio_bound: float, radius: float = 1.0) -> TransferParameters:
    """Q(y, .) has density at most C' against nu^P: exponent 0 with constant 1/C'."""
    if ratio_bound < 1:
        raise ValueError("a density ratio bound is at least 1")
    return TransferParameters(0.0, 1.0 / ratio_bound, radius)
