"""alpha-family evidence on h-grids, power-law fits and analytic memberships.

A pair (P, Q) lies in D(alpha, C) when (h/D)^alpha rho_h(P, Q) <= C for all
0 < h <= D, and in D'(alpha, alpha', C) when additionally
(h/D)^alpha' rho_h(Q, Q) <= C. A grid can only refute membership; passing
on a grid is necessary-condition evidence.
"""

import math
from typing import Literal, NamedTuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field
from scipy import stats

from src.similarity.rho import RhoCurve

logger = structlog.get_logger(__name__)

RELATIVE_SLACK = 1e-12


class InsufficientDataError(ValueError):
    """Raised when a fit has fewer than three finite points."""

    pass


class AlphaFamilyCheck(BaseModel):
    """Grid evidence for D(alpha, C) or D'(alpha, alpha', C).

    Attributes:
        sup_value: max over the grid of (h/D)^alpha rho_h(P, Q).
        sup_value_prime: max of (h/D)^alpha' rho_h(Q, Q) for the primed family.
        witness_h: Bandwidth attaining the larger violation, or the first
            infinite entry.
    """

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(ge=0)
    alpha_prime: float | None = None
    constant: float = Field(ge=1)
    diameter: float = Field(default=1.0, gt=0)
    sup_value: float
    sup_value_prime: float | None = None
    verdict: Literal["pass", "fail"]
    grid: list[float]
    witness_h: float | None = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


class AlphaFit(NamedTuple):
    """Least-squares slope of log rho_h against log(1/h)."""

    slope: float
    stderr: float
    intercept: float
    residual: float
    points: int


class AlphaMembership(NamedTuple):
    """Analytic family parameters; ``alpha_prime`` is set for the primed family."""

    alpha: float
    constant: float
    alpha_prime: float | None = None

    @property
    def family(self) -> str:
        return "D" if self.alpha_prime is None else "D-prime"


def _scaled_sup(curve: RhoCurve, exponent: float, diameter: float) -> tuple[float, float | None]:
    grid = curve.grid
    values = curve.values
    if not np.all(np.isfinite(values)):
        return math.inf, float(grid[int(np.argmax(~np.isfinite(values)))])
    scaled = (grid / diameter) ** exponent * values
    best = int(np.argmax(scaled))
    return float(scaled[best]), float(grid[best])


def alpha_family_check(
    curve: RhoCurve,
    alpha: float,
    constant: float,
    diameter: float = 1.0,
    alpha_prime: float | None = None,
    self_curve: RhoCurve | None = None,
) -> AlphaFamilyCheck:
    """Check sup_h (h/D)^alpha rho_h <= C on the grid of ``curve``.

    Args:
        curve: rho_h(P, Q) on a grid inside (0, D].
        alpha: Candidate index.
        constant: Candidate constant C >= 1.
        diameter: D.
        alpha_prime: Second index for the primed family.
        self_curve: rho_h(Q, Q), required with ``alpha_prime``.

    Returns:
        The check; any infinite entry fails with its h as witness.

    Raises:
        ValueError: If the grid leaves (0, D] or the primed family lacks a
            self-similarity curve.
    """
    grid = curve.grid
    if grid.size == 0 or np.any(grid <= 0) or np.any(grid > diameter * (1 + 1e-12)):
        raise ValueError("the h-grid must lie in (0, D]")
    if alpha_prime is not None and self_curve is None:
        raise ValueError("the primed family needs the rho_h(Q, Q) curve")

    limit = constant * (1.0 + RELATIVE_SLACK)
    sup_value, witness = _scaled_sup(curve, alpha, diameter)
    failed = sup_value > limit
    sup_prime: float | None = None
    if alpha_prime is not None and self_curve is not None:
        sup_prime, witness_prime = _scaled_sup(self_curve, alpha_prime, diameter)
        if sup_prime > limit and (not failed or sup_prime > sup_value):
            witness = witness_prime
        failed = failed or sup_prime > limit

    logger.debug(
        "alpha_family_check",
        alpha=alpha,
        alpha_prime=alpha_prime,
        constant=constant,
        sup_value=sup_value,
        verdict="fail" if failed else "pass",
    )
    return AlphaFamilyCheck(
        alpha=alpha,
        alpha_prime=alpha_prime,
        constant=constant,
        diameter=diameter,
        sup_value=sup_value,
        sup_value_prime=sup_prime,
        verdict="fail" if failed else "pass",
        grid=grid.tolist(),
        witness_h=witness if failed else None,
    )


def alpha_index_fit(curve: RhoCurve, lower_half: bool = True) -> AlphaFit:
    """Fit log rho_h = a + alpha log(1/h) by least squares.

    Only finite entries are used, and with ``lower_half`` only the smaller
    half of the bandwidths, where the power law is expected to hold.

    Raises:
        InsufficientDataError: With fewer than three usable points.
    """
    order = np.argsort(curve.grid)
    grid = curve.grid[order]
    values = curve.values[order]
    if lower_half:
        keep = max(3, math.ceil(grid.size / 2))
        grid, values = grid[:keep], values[:keep]
    finite = np.isfinite(values)
    if int(finite.sum()) < 3:
        raise InsufficientDataError("alpha fit needs at least 3 finite grid points")
    x = np.log(1.0 / grid[finite])
    y = np.log(values[finite])
    fit = stats.linregress(x, y)
    residual = float(np.sum((y - (fit.intercept + fit.slope * x)) ** 2))
    return AlphaFit(
        slope=float(fit.slope),
        stderr=float(fit.stderr),
        intercept=float(fit.intercept),
        residual=residual,
        points=int(finite.sum()),
    )


def holder_embedding_alpha(
    dimension: int, target_dimension: int, beta: float, beta_prime: float
) -> tuple[float, float]:
    """Transfer exponent and alpha-index for a target embedded by a Holder map.

    The chart phi of the target support is beta-Holder and its inverse is
    beta'-Holder.

    Returns:
        (gamma, alpha) with gamma = d - beta d_Q and alpha = d + ((1 - beta beta')/beta') d_Q
        when d_Q / beta' <= d, else 2d - beta d_Q.
    """
    if not (0 < beta <= 1 and 0 < beta_prime <= 1):
        raise ValueError("Holder exponents must lie in (0, 1]")
    if not 1 <= target_dimension <= dimension:
        raise ValueError("target dimension must lie in [1, d]")
    d, d_q = float(dimension), float(target_dimension)
    gamma = d - beta * d_q
    if d_q / beta_prime <= d:
        return gamma, d + (1.0 - beta * beta_prime) / beta_prime * d_q
    return gamma, 2.0 * d - beta * d_q


def product_beta_membership(
    source_gammas: list[float], target_gammas: list[float], epsilon: float
) -> AlphaMembership:
    """Family of the invariant laws of product-beta source and embedded target chains.

    The source has d coordinates with parameters gamma^P and modulation
    floor epsilon; the target is a product-beta chain on the first d_Q
    coordinates. alpha = sum gamma^P + sum (1 - eps gamma^Q) with constant
    3^{d_Q} / eps^{d + d_Q}; the primed family (alpha' = d_Q) applies when
    sum (1 - gamma^P) exceeds sum (1 - eps gamma^Q).
    """
    if not 0 < epsilon <= 1:
        raise ValueError("modulation floor must lie in (0, 1]")
    gp = np.asarray(source_gammas, dtype=float)
    gq = np.asarray(target_gammas, dtype=float)
    if gq.size > gp.size:
        raise ValueError("target has more active coordinates than the source")
    if np.any(gp[: gq.size] < gq):
        raise ValueError("source gammas must dominate target gammas coordinatewise")
    alpha = float(gp.sum() + np.sum(1.0 - epsilon * gq))
    constant = 3.0**gq.size / epsilon ** (gp.size + gq.size)
    if np.sum(1.0 - gp) <= np.sum(1.0 - epsilon * gq):
        return AlphaMembership(alpha, constant)
    return AlphaMembership(alpha, constant, alpha_prime=float(gq.size))
