"""Bernstein tail and negative-moment bounds, with Monte Carlo checks."""

import math
from typing import NamedTuple

import numpy as np
import structlog
from numpy.typing import ArrayLike, NDArray

from src.chains.finite import FiniteKernel, batch_step, categorical_draws

logger = structlog.get_logger(__name__)


def bernstein_tail(
    pseudo_gap: float,
    n: int,
    variance: float,
    sup_deviation: float,
    conj_exponent: float,
    density_norm: float,
    x: float,
) -> float:
    """Warm-start Bernstein bound on P(sum (f(Z_i) - pi(f)) >= x).

    density_norm * exp(-gamma_ps x^2 / (pbar (8 (n + 1/gamma_ps) var + 20 sup x)))
    """
    if pseudo_gap <= 0 or x <= 0:
        raise ValueError("pseudo_gap and x must be positive")
    if min(n, variance, sup_deviation, conj_exponent, density_norm) < 0:
        raise ValueError("bound arguments must be nonnegative")
    denominator = conj_exponent * (
        8.0 * (n + 1.0 / pseudo_gap) * variance + 20.0 * sup_deviation * x
    )
    if denominator == 0:
        return 0.0
    return float(density_norm * math.exp(-pseudo_gap * x**2 / denominator))


def negmom_bound(
    pseudo_gap: float,
    n: int,
    mean: float,
    sup_deviation: float,
    conj_exponent: float,
    density_norm: float,
) -> float:
    """Bound on E[1 / (1 + sum_{i<n} f(Z_i))] for bounded nonnegative f.

    4 * density_norm * (20 pbar sup / gamma_ps + 1) / (n pi(f)).

    Raises:
        ValueError: If pi(f) is not positive.
    """
    if mean <= 0:
        raise ValueError("negative-moment bound needs pi(f) > 0")
    if pseudo_gap <= 0 or n < 1:
        raise ValueError("pseudo_gap must be positive and n at least 1")
    if n * pseudo_gap < 1:
        logger.warning("negmom_short_path", n=n, pseudo_gap=pseudo_gap)
    return float(
        4.0
        * density_norm
        * (20.0 * conj_exponent * sup_deviation / pseudo_gap + 1.0)
        / (n * mean)
    )


def indicator_sums(
    kernel: FiniteKernel,
    init: ArrayLike,
    values: ArrayLike,
    n: int,
    reps: int,
    rng: np.random.Generator,
) -> NDArray[np.float64]:
    """sum_{i<n} f(Z_i) for ``reps`` independent paths started from ``init``.

    All replications advance together, one vectorized step at a time.
    """
    f = np.asarray(values, dtype=float)
    indices = np.arange(kernel.size)
    current = categorical_draws(indices.astype(float), init, reps, rng).astype(np.int64)
    totals = f[current].copy()
    for _ in range(n - 1):
        current = batch_step(kernel, current, rng)
        totals += f[current]
    return totals


class MonteCarloEstimate(NamedTuple):
    mean: float
    std_error: float


def tail_frequency(sums: NDArray[np.float64], center: float, x: float, lower: bool = True) -> float:
    """Fraction of replications with sum - center <= -x (lower) or >= x (upper)."""
    deviation = sums - center
    hits = deviation <= -x if lower else deviation >= x
    return float(np.mean(hits))


def negative_moment_estimate(sums: NDArray[np.float64]) -> MonteCarloEstimate:
    """Mean and standard error of 1 / (1 + sum)."""
    terms = 1.0 / (1.0 + sums)
    return MonteCarloEstimate(
        float(np.mean(terms)), float(np.std(terms, ddof=1) / math.sqrt(terms.size))
    )
