"""Spectral gaps, mixing times and Doeblin rates of finite kernels.

Spectral radii are taken from dense eigendecompositions. The pseudo gap
works on the symmetrized operator D^{1/2} (P*)^k P^k D^{-1/2}, which is
symmetric because (P*)^k P^k is self-adjoint in L^2(pi).
"""

import math
from typing import NamedTuple

import numpy as np
import structlog
from numpy.typing import ArrayLike, NDArray

from src.chains.finite import (
    FiniteKernel,
    is_irreducible,
    period,
    solve_stationary,
    stationary_finite,
)

logger = structlog.get_logger(__name__)

INVARIANCE_TOLERANCE = 1e-9
MIXING_TIME_CAP = 10**6
DEFAULT_K_MAX = 50


class SpectralError(ValueError):
    """Raised when a spectral quantity is requested for an unsuitable kernel."""

    pass


class MixingTimeExceeded(SpectralError):
    """Raised when the total-variation distance stays above 1/4 past the cap."""

    pass


class AbsoluteGap(NamedTuple):
    value: float
    periodic: bool = False


class PseudoGap(NamedTuple):
    value: float
    k: int
    truncated: bool


class MixingTime(NamedTuple):
    steps: int
    pseudo_gap_lower_bound: float


class DoeblinRate(NamedTuple):
    kappa: float
    c: float


def _check_invariant(kernel: FiniteKernel, pi: NDArray[np.float64]) -> None:
    if pi.shape != (kernel.size,) or np.any(pi <= 0):
        raise SpectralError("pi must be a strictly positive vector over the states")
    if np.max(np.abs(pi @ kernel.matrix - pi)) > INVARIANCE_TOLERANCE:
        raise SpectralError("pi is not invariant for the kernel")


def invariant_law(kernel: FiniteKernel) -> NDArray[np.float64]:
    """Invariant law of an irreducible kernel, periodic or not."""
    if not is_irreducible(kernel):
        raise SpectralError("kernel is reducible")
    return solve_stationary(kernel)


def adjoint_finite(kernel: FiniteKernel, pi: ArrayLike | None = None) -> FiniteKernel:
    """Time reversal P*_{ij} = pi_j p_{ji} / pi_i.

    Raises:
        SpectralError: If ``pi`` is not a positive invariant vector.
    """
    pi_vec = invariant_law(kernel) if pi is None else np.asarray(pi, dtype=float)
    _check_invariant(kernel, pi_vec)
    reverse = kernel.matrix.T * pi_vec[None, :] / pi_vec[:, None]
    reverse /= reverse.sum(axis=1, keepdims=True)
    return FiniteKernel(states=kernel.states, transition=reverse.tolist())


def is_reversible(kernel: FiniteKernel, pi: ArrayLike, tolerance: float = 1e-12) -> bool:
    """Detailed balance pi_i p_ij = pi_j p_ji."""
    flows = np.asarray(pi, dtype=float)[:, None] * kernel.matrix
    return bool(np.max(np.abs(flows - flows.T)) <= tolerance)


def _projection(pi: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.outer(np.ones_like(pi), pi)


def absolute_gap_finite(kernel: FiniteKernel) -> AbsoluteGap:
    """gamma* = 1 - rho(P - Pi), clamped to [0, 1].

    A periodic kernel has an eigenvalue on the unit circle; it gets gap 0 and
    ``periodic=True`` instead of an error.

    Uses a dense eigenvalue solve, O(K^3) in time and O(K^2) in memory, so it
    is meant for kernels with at most a few hundred states.
    """
    if not is_irreducible(kernel):
        raise SpectralError("kernel is reducible")
    kernel_period = period(kernel)
    if kernel_period != 1:
        logger.warning("absolute_gap_periodic", period=kernel_period)
        return AbsoluteGap(0.0, periodic=True)
    pi = stationary_finite(kernel)
    radius = float(np.max(np.abs(np.linalg.eigvals(kernel.matrix - _projection(pi)))))
    return AbsoluteGap(min(1.0, max(0.0, 1.0 - radius)))


def second_eigenvalue_modulus(kernel: FiniteKernel) -> float:
    """lambda = rho(P - Pi) = 1 - gamma*."""
    return 1.0 - absolute_gap_finite(kernel).value


def pseudo_gap_finite(kernel: FiniteKernel, k_max: int = DEFAULT_K_MAX) -> PseudoGap:
    """gamma_ps = max over 1 <= k <= k_max of (1 - rho((P*)^k P^k - Pi)) / k.

    Each k costs two dense K x K products and a symmetric eigenvalue solve;
    keep K to a few hundred states.

    Returns:
        The maximum, the smallest maximizing k, and whether that k equals
        ``k_max`` (the maximum may lie beyond the range searched).
    """
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    pi = invariant_law(kernel)
    adjoint = adjoint_finite(kernel, pi).matrix
    root = np.sqrt(pi)
    rank_one = np.outer(root, root)
    forward = np.eye(kernel.size)
    backward = np.eye(kernel.size)
    values = np.empty(k_max)
    for k in range(1, k_max + 1):
        forward = forward @ kernel.matrix
        backward = backward @ adjoint
        sym = root[:, None] * (backward @ forward) / root[None, :]
        sym = 0.5 * (sym + sym.T) - rank_one
        radius = float(np.max(np.abs(np.linalg.eigvalsh(sym))))
        values[k - 1] = max(0.0, 1.0 - radius) / k
    best = int(np.argmax(values))
    value = min(1.0, float(values[best]))
    return PseudoGap(value=value, k=best + 1, truncated=best + 1 == k_max)


def total_variation_rows(power: NDArray[np.float64], pi: NDArray[np.float64]) -> float:
    """max_x ||P^n(x, .) - pi||_TV for a matrix power."""
    return float(0.5 * np.abs(power - pi[None, :]).sum(axis=1).max())


def mixing_time_finite(
    kernel: FiniteKernel, pi: ArrayLike | None = None, cap: int = MIXING_TIME_CAP
) -> MixingTime:
    """Smallest n with max_x ||P^n(x, .) - pi||_TV <= 1/4, plus gamma_ps >= 1/(2 tau).

    Raises:
        MixingTimeExceeded: If n would exceed ``cap``, or at once for a
            periodic kernel, whose rows never approach pi.
    """
    if is_irreducible(kernel) and (kernel_period := period(kernel)) != 1:
        raise MixingTimeExceeded(f"periodic kernel (period {kernel_period}) never mixes")
    pi_vec = stationary_finite(kernel) if pi is None else np.asarray(pi, dtype=float)
    power = np.array(kernel.matrix)
    steps = 1
    while total_variation_rows(power, pi_vec) > 0.25:
        if steps >= cap:
            raise MixingTimeExceeded(f"total variation above 1/4 after {cap} steps")
        power = power @ kernel.matrix
        steps += 1
    return MixingTime(steps, 1.0 / (2.0 * steps))


def doeblin_to_rate(epsilon: float, lag: int = 1) -> DoeblinRate:
    """Uniform-ergodicity constants kappa = (1-eps)^{1/m}, c = 2/(1-eps).

    Examples:
        >>> doeblin_to_rate(0.5, 1)
        DoeblinRate(kappa=0.5, c=4.0)
    """
    if not 0 < epsilon <= 1:
        raise ValueError(f"minorization mass must lie in (0, 1], got {epsilon}")
    if lag < 1:
        raise ValueError(f"minorization lag must be at least 1, got {lag}")
    if epsilon == 1:
        return DoeblinRate(0.0, math.inf)
    return DoeblinRate((1.0 - epsilon) ** (1.0 / lag), 2.0 / (1.0 - epsilon))


def doeblin_mixing_bound(epsilon: float, lag: int = 1) -> MixingTime:
    """tau <= ceil(m log(8c) / log(1/kappa)), tau <= m when eps = 1."""
    if epsilon == 1:
        return MixingTime(lag, 1.0 / (2.0 * lag))
    kappa, c = doeblin_to_rate(epsilon, lag)
    steps = max(1, math.ceil(lag * math.log(8.0 * c) / math.log(1.0 / kappa)))
    return MixingTime(steps, 1.0 / (2.0 * steps))


def finite_doeblin(kernel: FiniteKernel, lag: int = 1) -> float:
    """Largest eps with P^m(i, .) >= eps nu: the column minima of P^m summed."""
    return float(kernel.power(lag).min(axis=0).sum())
