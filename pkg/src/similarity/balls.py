"""Closed-form ball probabilities and covering bounds under the sup-norm.

Sup-norm balls are boxes, so the mass of B(x, h) under a product law is the
product of one-dimensional interval masses. Degenerate coordinates (point
masses at a fixed value) contribute 1 when the value lies within h of x_i
and 0 otherwise.
"""

from collections.abc import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.chains.continuous import ContinuousKernel
from src.chains.distributions import BetaDistribution, BetaStep, Distribution, ProductBeta, UniformBox
from src.chains.metric import Metric

BallProbability = Callable[[NDArray[np.float64], NDArray[np.float64]], NDArray[np.float64]]
KernelBallProbability = Callable[
    [NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]], NDArray[np.float64]
]


class UnsupportedDescriptorError(ValueError):
    """Raised for a law or metric outside the closed-form descriptor family."""

    pass


def _beta_interval(shape: float, lo: NDArray[np.float64], hi: NDArray[np.float64]) -> NDArray[np.float64]:
    """Mass of [lo, hi] under Beta(shape, 1), whose CDF is t^shape on [0,1]."""
    return np.asarray(np.clip(hi, 0.0, 1.0) ** shape - np.clip(lo, 0.0, 1.0) ** shape)


def _point_mass(value: float, x: NDArray[np.float64], h: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.asarray(np.abs(x - value) <= h, dtype=float)


def ball_prob_closed_form(
    dist: Distribution,
    x: ArrayLike,
    h: ArrayLike,
    metric: Metric = Metric.SUP_NORM,
) -> NDArray[np.float64]:
    """Mass of the closed ball B(x, h) under ``dist``.

    Args:
        dist: Beta, product-beta, uniform-box or beta-step descriptor.
        x: Centers, shape (..., d); scalars are accepted when d = 1.
        h: Radii broadcasting against the leading shape of ``x``.
        metric: Only the sup-norm has closed forms.

    Returns:
        Ball probabilities with the broadcast leading shape.

    Raises:
        UnsupportedDescriptorError: For the Euclidean metric, a dimension
            mismatch or an unknown descriptor.

    Examples:
        >>> float(ball_prob_closed_form(UniformBox(), 0.5, 0.2))
        0.4
    """
    if metric is not Metric.SUP_NORM:
        raise UnsupportedDescriptorError(
            "closed-form ball probabilities require the sup-norm; use Monte Carlo"
        )
    points = np.asarray(x, dtype=float)
    if points.ndim == 0 or (dist.dimension == 1 and points.shape[-1] != 1):
        points = points[..., None]
    if points.shape[-1] != dist.dimension:
        raise UnsupportedDescriptorError(
            f"centers have dimension {points.shape[-1]}, law has dimension {dist.dimension}"
        )
    radius = np.asarray(h, dtype=float)
    lower = points - radius[..., None]
    upper = points + radius[..., None]

    if isinstance(dist, BetaDistribution | BetaStep):
        return _beta_interval(dist.shape, lower[..., 0], upper[..., 0])
    if isinstance(dist, ProductBeta):
        mass = np.ones(np.broadcast_shapes(points.shape[:-1], radius.shape))
        for i, shape in enumerate(dist.shapes):
            mass = mass * _beta_interval(shape, lower[..., i], upper[..., i])
        for i in range(dist.active_dimension, dist.dimension):
            mass = mass * _point_mass(0.0, points[..., i], radius)
        return mass
    if isinstance(dist, UniformBox):
        mass = np.ones(np.broadcast_shapes(points.shape[:-1], radius.shape))
        for i, (lo, up) in enumerate(zip(dist.lower, dist.upper, strict=True)):
            if lo == up:
                mass = mass * _point_mass(lo, points[..., i], radius)
            else:
                overlap = np.clip(np.minimum(upper[..., i], up) - np.maximum(lower[..., i], lo), 0.0, None)
                mass = mass * overlap / (up - lo)
        return mass
    raise UnsupportedDescriptorError(f"no closed form for descriptor {type(dist).__name__}")


def law_ball(dist: Distribution) -> BallProbability:
    """(x, h) -> mass of B(x, h) under a fixed law."""

    def ball(x: NDArray[np.float64], h: NDArray[np.float64]) -> NDArray[np.float64]:
        return ball_prob_closed_form(dist, x, h)

    return ball


def kernel_ball(spec: ContinuousKernel) -> KernelBallProbability:
    """(y, x, h) -> Q(y, B(x, h)) for a single state y."""

    def ball(y: NDArray[np.float64], x: NDArray[np.float64], h: NDArray[np.float64]) -> NDArray[np.float64]:
        return ball_prob_closed_form(spec.kernel_at(y), x, h)

    return ball


def covering_bound(diameter: float, epsilon: float, dimension: int) -> float:
    """(1 + 2D/eps)^d bounds the eps-covering number of a set of diameter D in R^d."""
    if diameter <= 0 or epsilon <= 0 or dimension < 1:
        raise ValueError("covering bound needs D, eps > 0 and d >= 1")
    return float((1.0 + 2.0 * diameter / epsilon) ** dimension)


def rho_self_upper(h: float, diameter: float, dimension: int) -> float:
    """rho_h(P, P) <= N(h/2) <= (1 + 4D/h)^d."""
    return covering_bound(diameter, h / 2.0, dimension)
