"""State-space geometry: metrics, diameters and box supports."""

from enum import StrEnum

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator


class Metric(StrEnum):
    """Metric on the state space."""

    SUP_NORM = "sup-norm"
    EUCLIDEAN = "euclidean"


class MetricSpaceSpec(BaseModel):
    """Bounded subset of R^d with a metric and diameter D."""

    model_config = ConfigDict(frozen=True)

    dimension: int = Field(default=1, ge=1, description="Ambient dimension d")
    metric: Metric = Field(default=Metric.SUP_NORM, description="Metric on the state space")
    diameter: float = Field(default=1.0, gt=0, description="Diameter D")

    @property
    def minkowski_p(self) -> float:
        """Minkowski exponent passed to scipy neighbor queries."""
        return float(np.inf) if self.metric is Metric.SUP_NORM else 2.0

    def as_points(self, x: ArrayLike) -> NDArray[np.float64]:
        """Coerce scalars or flat arrays into an array of points of shape (..., d)."""
        points = np.asarray(x, dtype=float)
        if self.dimension == 1 and (points.ndim == 0 or points.shape[-1] != 1):
            points = points[..., None]
        if points.shape[-1] != self.dimension:
            raise ValueError(
                f"points have dimension {points.shape[-1]}, space has {self.dimension}"
            )
        return points

    def distance(self, x: ArrayLike, y: ArrayLike) -> NDArray[np.float64]:
        """Broadcast distance between point arrays along the last axis."""
        diff = np.abs(self.as_points(x) - self.as_points(y))
        if self.metric is Metric.SUP_NORM:
            return np.asarray(diff.max(axis=-1))
        return np.asarray(np.sqrt((diff**2).sum(axis=-1)))

    def pairwise(self, a: ArrayLike, b: ArrayLike) -> NDArray[np.float64]:
        """Distance matrix between two point sets."""
        left = self.as_points(a).reshape(-1, self.dimension)
        right = self.as_points(b).reshape(-1, self.dimension)
        return self.distance(left[:, None, :], right[None, :, :])

    def norm(self, x: ArrayLike) -> NDArray[np.float64]:
        """Norm of points, i.e. their distance to the origin."""
        points = self.as_points(x)
        return self.distance(points, np.zeros(self.dimension))


class Box(BaseModel):
    """Closed axis-aligned box; a side with lower == upper is a degenerate (embedded) side."""

    model_config = ConfigDict(frozen=True)

    lower: list[float]
    upper: list[float]

    @model_validator(mode="after")
    def _check_sides(self) -> "Box":
        if len(self.lower) != len(self.upper) or not self.lower:
            raise ValueError("box needs matching, non-empty lower/upper bounds")
        if any(lo > up for lo, up in zip(self.lower, self.upper, strict=True)):
            raise ValueError("box lower bound exceeds upper bound")
        return self

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def degenerate_sides(self) -> list[bool]:
        return [lo == up for lo, up in zip(self.lower, self.upper, strict=True)]

    @classmethod
    def unit(cls, active: int, ambient: int | None = None) -> "Box":
        """[0,1]^active padded with {0} up to the ambient dimension."""
        ambient = ambient or active
        return cls(
            lower=[0.0] * ambient,
            upper=[1.0] * active + [0.0] * (ambient - active),
        )

    def contains(self, x: ArrayLike) -> NDArray[np.bool_]:
        points = np.asarray(x, dtype=float)
        return np.asarray(
            np.all((points >= np.asarray(self.lower)) & (points <= np.asarray(self.upper)), axis=-1)
        )
