"""Nadaraya-Watson regression with the uniform kernel on closed balls.

f_hat(x) is the mean of the responses Y_i with d(x, X_i) <= h, and 0 when
no training point lies within h of x. In-ball responses are summed in
training-index order with compensated summation, so the KD-tree and the
brute-force search return the same predictions.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import structlog
from numpy.typing import ArrayLike, NDArray
from scipy.spatial import KDTree

from src.chains.metric import MetricSpaceSpec
from src.chains.paths import StatePath

logger = structlog.get_logger(__name__)

SearchMethod = Literal["kdtree", "brute"]

BRUTE_CHUNK = 512


@dataclass(frozen=True)
class FittedNW:
    """Immutable training set and bandwidth of a uniform-kernel estimator.

    Attributes:
        covariates: Training points, shape (n, d).
        responses: Training responses, shape (n,).
        bandwidth: h > 0.
        space: Metric used for the balls.
        search: Neighbour search backend.
    """

    covariates: NDArray[np.float64]
    responses: NDArray[np.float64]
    bandwidth: float
    space: MetricSpaceSpec
    search: SearchMethod = "kdtree"
    _tree: KDTree | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        covariates = np.array(self.covariates, dtype=float, copy=True)
        if covariates.ndim == 1:
            covariates = covariates[:, None]
        responses = np.array(self.responses, dtype=float, copy=True).reshape(-1)
        if covariates.shape[0] == 0:
            raise ValueError("the estimator needs at least one training point")
        if responses.shape[0] != covariates.shape[0]:
            raise ValueError(
                f"{responses.shape[0]} responses for {covariates.shape[0]} covariates"
            )
        if covariates.shape[1] != self.space.dimension:
            raise ValueError(
                f"covariates have dimension {covariates.shape[1]}, space has {self.space.dimension}"
            )
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
        covariates.flags.writeable = False
        responses.flags.writeable = False
        object.__setattr__(self, "covariates", covariates)
        object.__setattr__(self, "responses", responses)
        if self.search == "kdtree":
            object.__setattr__(self, "_tree", KDTree(covariates))

    @property
    def size(self) -> int:
        return int(self.covariates.shape[0])

    def neighbours(self, queries: NDArray[np.float64]) -> list[NDArray[np.int64]]:
        """Sorted training indices inside the closed ball around each query."""
        if self._tree is not None:
            hits = self._tree.query_ball_point(
                queries, r=self.bandwidth, p=self.space.minkowski_p
            )
            return [np.sort(np.asarray(h, dtype=np.int64)) for h in hits]
        found: list[NDArray[np.int64]] = []
        for start in range(0, queries.shape[0], BRUTE_CHUNK):
            block = self.space.pairwise(queries[start : start + BRUTE_CHUNK], self.covariates)
            found.extend(np.flatnonzero(row <= self.bandwidth) for row in block)
        return found


def fit_nw(
    covariates: ArrayLike,
    responses: ArrayLike,
    bandwidth: float,
    space: MetricSpaceSpec | None = None,
    search: SearchMethod = "kdtree",
) -> FittedNW:
    """Store a training sample for uniform-kernel prediction."""
    points = np.asarray(covariates, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    space = space or MetricSpaceSpec(dimension=points.shape[1])
    return FittedNW(points, np.asarray(responses, dtype=float), bandwidth, space, search)


def fit_nw_paths(
    paths: Sequence[StatePath],
    bandwidth: float,
    space: MetricSpaceSpec | None = None,
    search: SearchMethod = "kdtree",
) -> FittedNW:
    """Pool labelled paths, in the order given, into one training sample.

    Raises:
        ValueError: If a path carries no responses.
    """
    if any(p.responses is None for p in paths):
        raise ValueError("every training path needs responses")
    covariates = np.concatenate([p.states for p in paths])
    responses = np.concatenate([np.asarray(p.responses) for p in paths])
    return fit_nw(covariates, responses, bandwidth, space, search)


def _as_queries(model: FittedNW, x: ArrayLike) -> NDArray[np.float64]:
    points = model.space.as_points(x)
    return points.reshape(-1, model.space.dimension)


def nw_predict(model: FittedNW, x: ArrayLike) -> NDArray[np.float64]:
    """Predictions at one or many query points.

    Args:
        model: Fitted estimator.
        x: A point or an array of points of shape (m, d); scalars are
            accepted in dimension 1.

    Returns:
        Array of shape (m,): the in-ball response mean, or 0 where the ball
        holds no training point.

    Examples:
        >>> model = fit_nw([[0.0], [0.1]], [1.0, 3.0], 0.2)
        >>> nw_predict(model, 0.05).tolist()
        [2.0]
    """
    queries = _as_queries(model, x)
    predictions = np.zeros(queries.shape[0])
    for i, idx in enumerate(model.neighbours(queries)):
        if idx.size:
            predictions[i] = math.fsum(model.responses[idx]) / idx.size
    return predictions


def coverage_counts(model: FittedNW, x: ArrayLike) -> NDArray[np.int64]:
    """Number of training points within h of each query; 0 means outside G_n."""
    return np.array([idx.size for idx in model.neighbours(_as_queries(model, x))], dtype=np.int64)
