"""Holder test functions f* with certified constants, and a random-pair audit.

Every registered function satisfies |f(x) - f(y)| <= L d(x, y)^beta on R^d
for the metric it was built with: ``power`` by the reverse triangle
inequality, ``ridge`` and ``sine`` because the direction w has dual norm 1
(l1 for the sup-norm, l2 for the Euclidean metric).
"""

import math
from collections.abc import Callable
from typing import Literal, NamedTuple, cast

import numpy as np
import structlog
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.chains.metric import Metric, MetricSpaceSpec

logger = structlog.get_logger(__name__)

AUDIT_PAIRS = 10_000
AUDIT_SLACK = 1e-9

FunctionName = Literal["power", "ridge", "sine", "constant"]


class HolderSpec(BaseModel):
    """A named member of H(beta, L) on [0,1]^d.

    Attributes:
        name: ``power`` L ||x||^beta, ``ridge`` L |<w, x>|^beta, ``sine``
            (L / 2 pi) sin(2 pi <w, x>) with beta = 1, or ``constant``.
        beta: Holder exponent in (0, 1].
        lipschitz: Holder constant L.
        dimension: d.
        metric: Metric the constant refers to.
        level: Value of the constant function.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    name: FunctionName = "power"
    beta: float = Field(default=1.0, gt=0, le=1)
    lipschitz: float = Field(default=1.0, gt=0, alias="L")
    dimension: int = Field(default=1, ge=1)
    metric: Metric = Metric.SUP_NORM
    level: float = 0.0

    @model_validator(mode="after")
    def _check(self) -> "HolderSpec":
        if self.name == "sine" and self.beta != 1.0:
            raise ValueError("the sine test function is only certified for beta = 1")
        return self

    @property
    def space(self) -> MetricSpaceSpec:
        return MetricSpaceSpec(dimension=self.dimension, metric=self.metric)

    @property
    def direction(self) -> NDArray[np.float64]:
        """Unit direction w of ridge and sine functions in the dual norm."""
        if self.metric is Metric.SUP_NORM:
            return np.full(self.dimension, 1.0 / self.dimension)
        return np.full(self.dimension, 1.0 / math.sqrt(self.dimension))

    def __call__(self, x: ArrayLike) -> NDArray[np.float64]:
        """Evaluate at points of shape (n, d); returns shape (n,)."""
        points = self.space.as_points(x).reshape(-1, self.dimension)
        if self.name == "constant":
            return np.full(points.shape[0], self.level)
        if self.name == "power":
            return np.asarray(self.lipschitz * self.space.norm(points) ** self.beta)
        projection = points @ self.direction
        if self.name == "ridge":
            return np.asarray(self.lipschitz * np.abs(projection) ** self.beta)
        return np.asarray(self.lipschitz / (2.0 * math.pi) * np.sin(2.0 * math.pi * projection))

    def sup_norm(self) -> float:
        """sup over [0,1]^d of |f|."""
        if self.name == "constant":
            return abs(self.level)
        if self.name == "sine":
            return self.lipschitz / (2.0 * math.pi)
        corner = np.ones((1, self.dimension))
        return float(self(corner)[0])


def holder_library(
    name: str,
    beta: float = 1.0,
    lipschitz: float = 1.0,
    dimension: int = 1,
    metric: Metric = Metric.SUP_NORM,
) -> HolderSpec:
    """Look up a test function by name.

    Raises:
        ValueError: For an unknown name.
    """
    if name not in ("power", "ridge", "sine", "constant"):
        raise ValueError(f"unknown test function {name!r}")
    return HolderSpec(name=cast(FunctionName, name), beta=beta, L=lipschitz, dimension=dimension, metric=metric)


class HolderAudit(NamedTuple):
    """Worst |f(x) - f(y)| / (L d(x, y)^beta) over random pairs."""

    passed: bool
    worst_ratio: float
    witness: tuple[list[float], list[float]]
    pairs: int


def holder_audit(
    f: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    beta: float,
    lipschitz: float,
    space: MetricSpaceSpec,
    pairs: int = AUDIT_PAIRS,
    seed: int = 0,
    slack: float = AUDIT_SLACK,
) -> HolderAudit:
    """Check the Holder inequality on uniform random pairs in [0,1]^d.

    A pair passes when |f(x) - f(y)| <= L d(x, y)^beta + slack.
    """
    rng = np.random.default_rng(seed)
    x = rng.random((pairs, space.dimension))
    y = rng.random((pairs, space.dimension))
    # pin one pair to the origin, where power functions are steepest
    x[0] = 0.0
    gap = np.abs(np.asarray(f(x)) - np.asarray(f(y)))
    allowed = lipschitz * space.distance(x, y) ** beta
    ratio = np.where(allowed > 0, gap / np.where(allowed > 0, allowed, 1.0), np.where(gap > 0, np.inf, 0.0))
    worst = int(np.argmax(ratio))
    passed = bool(np.all(gap <= allowed + slack))
    if not passed:
        logger.info("holder_audit_failed", worst_ratio=float(ratio[worst]), beta=beta, L=lipschitz)
    return HolderAudit(passed, float(ratio[worst]), (x[worst].tolist(), y[worst].tolist()), pairs)
