"""The bandwidth-dependent similarity rho_h(P, Q) = E_{X~Q}[1 / P(B(X, h))].

Finite laws get the exact sum. Continuous laws get a nested Monte Carlo
estimate: an outer sample from the target, and an inner sample from the
source that estimates each ball probability. Curves over an h-grid reuse
the same draws at every h.
"""

import math
from collections.abc import Callable, Sequence
from typing import Literal

import numpy as np
import structlog
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.spatial import KDTree

from src.chains.continuous import ContinuousKernel, stationary_draws
from src.chains.distributions import Distribution
from src.chains.finite import categorical_draws
from src.chains.metric import MetricSpaceSpec
from src.chains.paths import SeedLike
from src.chains.rng import split_seed
from src.config import settings

logger = structlog.get_logger(__name__)

Sampler = Callable[[np.random.Generator, int], NDArray[np.float64]]

DEFAULT_GRID_POINTS = 20
DEFAULT_GRID_RATIO = 200.0
INNER_GROUPS = 20


class GridMismatchError(ValueError):
    """Raised when two rho curves are evaluated on different h-grids."""

    pass


class SimilarityEstimate(BaseModel):
    """One value of rho_h, possibly infinite.

    Attributes:
        h: Bandwidth.
        value: rho_h, at least 1, or ``inf`` on explosion.
        method: How the value was obtained.
        std_error: Monte Carlo standard error over the finite terms, covering both
            the outer and the shared inner draws; 0 for exact values.
        explosion_flag: True when some target ball had zero source mass.
        witness: A target point whose ball had zero source mass.
        zero_cells: Number of outer draws whose inner count was 0.
    """

    model_config = ConfigDict(frozen=True)

    h: float = Field(gt=0)
    value: float
    method: Literal["exact", "monte-carlo", "closed-form", "mixture-bound"]
    std_error: float | None = None
    explosion_flag: bool = False
    witness: list[float] | None = None
    zero_cells: int = 0
    inner_budget: int | None = None
    outer_budget: int | None = None

    @field_validator("value")
    @classmethod
    def _at_least_one(cls, v: float) -> float:
        if math.isnan(v) or v < 1.0:
            raise ValueError(f"rho_h is at least 1, got {v}")
        return v

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)


class RhoCurve(BaseModel):
    """rho_h over an h-grid, ordered as the grid was given."""

    model_config = ConfigDict(frozen=True)

    estimates: list[SimilarityEstimate]
    label: str = ""

    @property
    def grid(self) -> NDArray[np.float64]:
        return np.array([e.h for e in self.estimates])

    @property
    def values(self) -> NDArray[np.float64]:
        return np.array([e.value for e in self.estimates])

    def rows(self) -> list[list[object]]:
        """CSV rows ``h,value,std_error,explosion``."""
        return [
            [e.h, e.value, e.std_error if e.std_error is not None else "", int(e.explosion_flag)]
            for e in self.estimates
        ]

    @classmethod
    def from_values(
        cls,
        grid: ArrayLike,
        values: ArrayLike,
        method: Literal["exact", "monte-carlo", "closed-form", "mixture-bound"] = "closed-form",
        label: str = "",
    ) -> "RhoCurve":
        """Build a curve from plain arrays, flagging infinite entries."""
        estimates = [
            SimilarityEstimate(
                h=float(h),
                value=float(v),
                method=method,
                std_error=0.0 if method in ("exact", "closed-form") else None,
                explosion_flag=not math.isfinite(float(v)),
            )
            for h, v in zip(np.asarray(grid, dtype=float), np.asarray(values, dtype=float), strict=True)
        ]
        return cls(estimates=estimates, label=label)


RHO_CSV_HEADER = ["h", "value", "std_error", "explosion"]


def geometric_grid(
    diameter: float = 1.0, points: int = DEFAULT_GRID_POINTS, ratio: float = DEFAULT_GRID_RATIO
) -> NDArray[np.float64]:
    """Decreasing geometric grid from D down to D/ratio.

    Examples:
        >>> geometric_grid(1.0, 3, 100).tolist()
        [1.0, 0.1, 0.01]
    """
    if points < 2 or ratio <= 1 or diameter <= 0:
        raise ValueError("grid needs at least 2 points, ratio > 1 and D > 0")
    return np.asarray(diameter * np.geomspace(1.0, 1.0 / ratio, points))


def _check_probability(vector: NDArray[np.float64], name: str) -> None:
    if np.any(vector < 0) or abs(float(vector.sum()) - 1.0) > 1e-9:
        raise ValueError(f"{name} must be a probability vector")


def rho_exact_finite(
    mixture: ArrayLike,
    target: ArrayLike,
    coords: ArrayLike,
    h: float,
    space: MetricSpaceSpec | None = None,
) -> SimilarityEstimate:
    """Exact rho_h between two laws on the same finite set of points.

    Args:
        mixture: Source probabilities mu_i.
        target: Target probabilities q_j.
        coords: Point coordinates, shape (K, d).
        h: Bandwidth; balls are closed.
        space: Metric; the sup-norm when omitted.

    Returns:
        sum_j q_j / mu(B(x_j, h)), or ``inf`` with a witness when some target
        atom sees no source mass.

    Examples:
        >>> round(rho_exact_finite([0.25, 0.75], [0.5, 0.5], [[0.0], [1.0]], 0.5).value, 4)
        2.6667
    """
    return rho_exact_curve(mixture, target, coords, [h], space).estimates[0]


def rho_exact_curve(
    mixture: ArrayLike,
    target: ArrayLike,
    coords: ArrayLike,
    grid: Sequence[float] | NDArray[np.float64],
    space: MetricSpaceSpec | None = None,
) -> RhoCurve:
    """:func:`rho_exact_finite` at every h of a grid."""
    mu = np.asarray(mixture, dtype=float)
    q = np.asarray(target, dtype=float)
    _check_probability(mu, "mixture")
    _check_probability(q, "target")
    points = np.asarray(coords, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if not mu.shape == q.shape == (points.shape[0],):
        raise ValueError("mixture, target and coords must describe the same states")
    space = space or MetricSpaceSpec(dimension=points.shape[1])
    distances = space.pairwise(points, points)
    charged = q > 0
    estimates = []
    for h in np.asarray(grid, dtype=float):
        ball_mass = (distances[charged] <= h).astype(float) @ mu
        empty = ball_mass <= 0
        if np.any(empty):
            witness = points[charged][int(np.argmax(empty))]
            estimates.append(
                SimilarityEstimate(
                    h=float(h),
                    value=math.inf,
                    method="exact",
                    std_error=0.0,
                    explosion_flag=True,
                    witness=witness.tolist(),
                    zero_cells=int(empty.sum()),
                )
            )
            continue
        value = float(np.sum(q[charged] / ball_mass))
        estimates.append(
            SimilarityEstimate(h=float(h), value=max(1.0, value), method="exact", std_error=0.0)
        )
    return RhoCurve(estimates=estimates)


def _ball_counts(
    source: NDArray[np.float64], centers: NDArray[np.float64], h: float, space: MetricSpaceSpec
) -> NDArray[np.int64]:
    """Number of source points within the closed ball of radius h around each center."""
    if source.shape[1] == 1:
        ordered = np.sort(source[:, 0])
        x = centers[:, 0]
        hi = np.searchsorted(ordered, x + h, side="right")
        lo = np.searchsorted(ordered, x - h, side="left")
        return np.asarray(hi - lo, dtype=np.int64)
    tree = KDTree(source)
    counts = tree.query_ball_point(centers, r=h, p=space.minkowski_p, return_length=True)
    return np.asarray(counts, dtype=np.int64)


def _inner_jackknife_variance(
    group_counts: NDArray[np.int64], group_sizes: list[int], inner: int
) -> float:
    """Delete-a-group jackknife variance of mean(inner / N(x)) over the inner draws.

    ``group_counts`` has one row per group and one column per outer draw with
    a positive total count. A group holding every hit of a ball leaves that
    term unchanged in its replicate.
    """
    n_groups = group_counts.shape[0]
    if n_groups < 2 or group_counts.shape[1] == 0:
        return 0.0
    totals = group_counts.sum(axis=0)
    full_terms = inner / totals
    replicates = np.empty(n_groups)
    for g in range(n_groups):
        rest = totals - group_counts[g]
        terms = np.where(rest > 0, (inner - group_sizes[g]) / np.maximum(rest, 1), full_terms)
        replicates[g] = terms.mean()
    return float((n_groups - 1) / n_groups * np.sum((replicates - replicates.mean()) ** 2))


def rho_mc_curve(
    source_sampler: Sampler,
    target_sampler: Sampler,
    grid: Sequence[float] | NDArray[np.float64],
    outer_n: int | None = None,
    inner_n: int | None = None,
    seed: SeedLike = 0,
    space: MetricSpaceSpec | None = None,
) -> RhoCurve:
    """Nested Monte Carlo rho_h over a grid with one shared draw set.

    Each outer term is inner_n / N(x), N(x) the number of inner source draws
    in B(x, h). A zero count makes the whole estimate infinite at that h,
    with the first such x as witness.

    Every outer term reuses the same inner draws, so their inner errors are
    correlated. The standard error adds the spread over outer draws to a
    delete-a-group jackknife variance over ``INNER_GROUPS`` interleaved
    groups of inner draws.

    Raises:
        ValueError: If a budget is below 1.
    """
    outer = settings.rho_outer_n if outer_n is None else outer_n
    inner = settings.rho_inner_n if inner_n is None else inner_n
    if outer < 1 or inner < 1:
        raise ValueError("outer_n and inner_n must be at least 1")
    source_seed, target_seed = split_seed(seed, 2)
    source = np.asarray(source_sampler(np.random.default_rng(source_seed), inner), dtype=float)
    centers = np.asarray(target_sampler(np.random.default_rng(target_seed), outer), dtype=float)
    if source.ndim == 1:
        source = source[:, None]
    if centers.ndim == 1:
        centers = centers[:, None]
    space = space or MetricSpaceSpec(dimension=source.shape[1])

    groups = [source[g::INNER_GROUPS] for g in range(min(INNER_GROUPS, inner))]

    estimates = []
    for h in np.asarray(grid, dtype=float):
        group_counts = np.stack([_ball_counts(part, centers, float(h), space) for part in groups])
        counts = group_counts.sum(axis=0)
        empty = counts == 0
        finite_terms = inner / counts[~empty]
        variance = (
            float(np.var(finite_terms, ddof=1)) / finite_terms.size if finite_terms.size > 1 else 0.0
        )
        variance += _inner_jackknife_variance(
            group_counts[:, ~empty], [part.shape[0] for part in groups], inner
        )
        std_error = math.sqrt(variance)
        if np.any(empty):
            value = math.inf
            witness: list[float] | None = centers[int(np.argmax(empty))].tolist()
        else:
            value = max(1.0, float(finite_terms.mean()))
            witness = None
        estimates.append(
            SimilarityEstimate(
                h=float(h),
                value=value,
                method="monte-carlo",
                std_error=std_error,
                explosion_flag=witness is not None,
                witness=witness,
                zero_cells=int(empty.sum()),
                inner_budget=inner,
                outer_budget=outer,
            )
        )
    logger.debug(
        "rho_mc_curve",
        points=len(estimates),
        outer_n=outer,
        inner_n=inner,
        exploded=sum(e.explosion_flag for e in estimates),
    )
    return RhoCurve(estimates=estimates)


def rho_mc(
    source_sampler: Sampler,
    target_sampler: Sampler,
    h: float,
    outer_n: int | None = None,
    inner_n: int | None = None,
    seed: SeedLike = 0,
    space: MetricSpaceSpec | None = None,
) -> SimilarityEstimate:
    """Nested Monte Carlo rho_h at a single bandwidth."""
    return rho_mc_curve(source_sampler, target_sampler, [h], outer_n, inner_n, seed, space).estimates[0]


def rho_mixture(n_p: int, n_q: int, curve_p: RhoCurve, curve_q: RhoCurve) -> RhoCurve:
    """Upper bound n * min(rho_P / n_P, rho_Q / n_Q) for the pooled design.

    ``curve_p`` is rho_h(pi^P, pi^Q) and ``curve_q`` is rho_h(pi^Q, pi^Q).
    An empty block drops out, so n_Q = 0 returns rho_P exactly.

    Raises:
        GridMismatchError: If the curves use different grids.
    """
    if n_p < 0 or n_q < 0 or n_p + n_q == 0:
        raise ValueError("block sizes must be non-negative with a positive total")
    grid = curve_p.grid
    if grid.shape != curve_q.grid.shape or not np.allclose(grid, curve_q.grid, rtol=1e-12, atol=0):
        raise GridMismatchError("rho curves are evaluated on different h-grids")
    if n_q == 0:
        values = curve_p.values
    elif n_p == 0:
        values = curve_q.values
    else:
        n = n_p + n_q
        values = np.maximum(1.0, n * np.minimum(curve_p.values / n_p, curve_q.values / n_q))
    return RhoCurve.from_values(grid, values, method="mixture-bound", label="mixture")


def rho_uniform_closed_form(h: float) -> float:
    """rho_h(U, U) for the uniform law on [0,1] under |.|.

    Examples:
        >>> round(rho_uniform_closed_form(0.25), 4)
        2.3863
    """
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    if h <= 0.5:
        return 2.0 * math.log(2.0) + 1.0 / (2.0 * h) - 1.0
    if h <= 1.0:
        return 2.0 * math.log(1.0 / h) + 2.0 * h - 1.0
    return 1.0


def law_sampler(law: Distribution) -> Sampler:
    """Exact draws from a descriptor."""

    def sample(rng: np.random.Generator, size: int) -> NDArray[np.float64]:
        return law.sample(rng, size)

    return sample


def finite_sampler(coords: ArrayLike, probs: ArrayLike) -> Sampler:
    """Draws from a law on finitely many points."""
    points = np.asarray(coords, dtype=float)
    weights = np.asarray(probs, dtype=float)

    def sample(rng: np.random.Generator, size: int) -> NDArray[np.float64]:
        return categorical_draws(points, weights, size, rng)

    return sample


def stationary_sampler(spec: ContinuousKernel, burn_in: int | None = None) -> Sampler:
    """Long-run draws approximating the invariant law of a continuous chain."""

    def sample(rng: np.random.Generator, size: int) -> NDArray[np.float64]:
        return stationary_draws(spec, size, rng, burn_in)

    return sample

