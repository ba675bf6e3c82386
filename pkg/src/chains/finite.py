"""Finite-state Markov kernels: validation, stationary laws and sampling."""

import math
from functools import cached_property
from typing import Literal

import numpy as np
import structlog
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from src.chains.metric import MetricSpaceSpec
from src.chains.paths import SeedLike, StatePath, seed_label

logger = structlog.get_logger(__name__)

ROW_SUM_TOLERANCE = 1e-12


class KernelValidationError(ValueError):
    """Raised when a kernel specification violates its structural invariants."""

    pass


class FiniteKernel(BaseModel):
    """Transition matrix on K distinct points of R^d.

    Attributes:
        states: K points, each a list of d coordinates.
        transition: K x K row-stochastic matrix.
    """

    model_config = ConfigDict(frozen=True)

    family: Literal["finite"] = "finite"
    states: list[list[float]] = Field(min_length=1)
    transition: list[list[float]] = Field(min_length=1)

    @model_validator(mode="after")
    def _check(self) -> "FiniteKernel":
        size = len(self.states)
        matrix = np.asarray(self.transition, dtype=float)
        if matrix.shape != (size, size):
            raise KernelValidationError(
                f"transition must be {size}x{size} to match the states, got {matrix.shape}"
            )
        if np.any(matrix < 0) or np.any(matrix > 1):
            raise KernelValidationError("transition entries must lie in [0, 1]")
        row_error = np.abs(matrix.sum(axis=1) - 1.0)
        if np.any(row_error > ROW_SUM_TOLERANCE):
            row = int(np.argmax(row_error))
            raise KernelValidationError(f"transition row {row} does not sum to 1")
        if len({len(s) for s in self.states}) != 1:
            raise KernelValidationError("all states must share one dimension")
        if size > 1 and self.min_gap() <= 0:
            raise KernelValidationError("states must be pairwise distinct")
        return self

    @classmethod
    def from_matrix(
        cls, transition: ArrayLike, states: ArrayLike | None = None
    ) -> "FiniteKernel":
        """Build a kernel; states default to evenly spaced points of [0,1]."""
        matrix = np.asarray(transition, dtype=float)
        size = matrix.shape[0]
        if states is None:
            coords = np.linspace(0.0, 1.0, size)[:, None] if size > 1 else np.zeros((1, 1))
        else:
            coords = np.asarray(states, dtype=float)
            if coords.ndim == 1:
                coords = coords[:, None]
        return cls(states=coords.tolist(), transition=matrix.tolist())

    @cached_property
    def matrix(self) -> NDArray[np.float64]:
        matrix = np.asarray(self.transition, dtype=float)
        matrix.flags.writeable = False
        return matrix

    @cached_property
    def coords(self) -> NDArray[np.float64]:
        coords = np.asarray(self.states, dtype=float)
        coords.flags.writeable = False
        return coords

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def dimension(self) -> int:
        return len(self.states[0])

    def min_gap(self, space: MetricSpaceSpec | None = None) -> float:
        """Minimum distance delta between distinct states."""
        if self.size == 1:
            return math.inf
        space = space or MetricSpaceSpec(dimension=self.dimension)
        distances = space.pairwise(self.coords, self.coords)
        np.fill_diagonal(distances, np.inf)
        return float(distances.min())

    def power(self, m: int) -> NDArray[np.float64]:
        return np.linalg.matrix_power(self.matrix, m)


def _support_graph(kernel: FiniteKernel) -> csr_matrix:
    return csr_matrix((kernel.matrix > 0).astype(float))


def is_irreducible(kernel: FiniteKernel) -> bool:
    n_components, _ = connected_components(
        _support_graph(kernel), directed=True, connection="strong"
    )
    return bool(n_components == 1)


def period(kernel: FiniteKernel) -> int:
    """Period of an irreducible kernel: gcd of cycle lengths through state 0.

    Uses BFS levels from state 0; every positive edge (i, j) contributes
    level[i] + 1 - level[j] to the gcd.
    """
    levels = shortest_path(_support_graph(kernel), unweighted=True, indices=0)
    rows, cols = np.nonzero(kernel.matrix > 0)
    offsets = np.abs(levels[rows] + 1 - levels[cols]).astype(np.int64)
    return int(np.gcd.reduce(offsets))


def solve_stationary(kernel: FiniteKernel) -> NDArray[np.float64]:
    """Invariant law of an irreducible kernel by GTH elimination.

    Raises:
        KernelValidationError: If the elimination meets a zero pivot (reducible).
    """
    a = np.array(kernel.matrix, dtype=float)
    size = kernel.size
    for k in range(size - 1):
        scale = a[k, k + 1 :].sum()
        if scale <= 0:
            raise KernelValidationError("kernel is reducible")
        a[k + 1 :, k] /= scale
        a[k + 1 :, k + 1 :] += np.outer(a[k + 1 :, k], a[k, k + 1 :])
    pi = np.zeros(size)
    pi[-1] = 1.0
    for k in range(size - 2, -1, -1):
        pi[k] = pi[k + 1 :] @ a[k + 1 :, k]
    return np.asarray(pi / pi.sum())


def stationary_finite(kernel: FiniteKernel) -> NDArray[np.float64]:
    """Stationary distribution pi with pi P = pi.

    Args:
        kernel: An irreducible, aperiodic finite kernel.

    Returns:
        Strictly positive probability vector.

    Raises:
        KernelValidationError: Naming the failed property (reducible or periodic).

    Examples:
        >>> stationary_finite(FiniteKernel.from_matrix([[0.7, 0.3], [0.1, 0.9]]))
        array([0.25, 0.75])
    """
    if not is_irreducible(kernel):
        raise KernelValidationError("kernel is reducible")
    kernel_period = period(kernel)
    if kernel_period != 1:
        raise KernelValidationError(f"kernel is periodic (period {kernel_period})")
    return solve_stationary(kernel)


def _cumulative(weights: NDArray[np.float64]) -> NDArray[np.float64]:
    cumulative = np.cumsum(weights, axis=-1)
    cumulative[..., -1] = 1.0
    return cumulative


def sample_indices(
    kernel: FiniteKernel, init: ArrayLike, n: int, rng: np.random.Generator
) -> NDArray[np.int64]:
    """State indices of a path of length n started from the law ``init``."""
    init_vec = np.asarray(init, dtype=float)
    if init_vec.shape != (kernel.size,) or abs(init_vec.sum() - 1.0) > 1e-9:
        raise KernelValidationError("init must be a probability vector over the states")
    if n < 1:
        raise ValueError("path length must be at least 1")
    uniforms = rng.random(n)
    rows = _cumulative(np.asarray(kernel.matrix))
    indices = np.empty(n, dtype=np.int64)
    current = int(np.searchsorted(_cumulative(init_vec), uniforms[0], side="right"))
    indices[0] = current
    for i in range(1, n):
        current = int(np.searchsorted(rows[current], uniforms[i], side="right"))
        indices[i] = current
    return indices


def sample_finite_path(
    kernel: FiniteKernel, init: ArrayLike, n: int, seed: SeedLike, block: str = "P"
) -> StatePath:
    """Sample X_0..X_{n-1} of a finite chain.

    Args:
        kernel: Finite kernel.
        init: Initial probability vector.
        n: Path length (>= 1).
        seed: Integer seed or SeedSequence; the same seed reproduces the path.
        block: Block label stored on the path.

    Returns:
        StatePath whose states are the kernel coordinates along the path.
    """
    indices = sample_indices(kernel, init, n, np.random.default_rng(seed))
    return StatePath(states=kernel.coords[indices], seed=seed_label(seed), block=block)


def categorical_draws(
    coords: NDArray[np.float64], probs: ArrayLike, size: int, rng: np.random.Generator
) -> NDArray[np.float64]:
    """Independent draws of the atoms ``coords`` with weights ``probs``."""
    cumulative = _cumulative(np.asarray(probs, dtype=float))
    picks = np.searchsorted(cumulative, rng.random(size), side="right")
    return np.asarray(coords[picks])


def batch_step(
    kernel: FiniteKernel, current: NDArray[np.int64], rng: np.random.Generator
) -> NDArray[np.int64]:
    """Advance many independent copies of the chain one step."""
    rows = _cumulative(np.asarray(kernel.matrix))[current]
    uniforms = rng.random(current.shape[0])
    return np.asarray((uniforms[:, None] >= rows).sum(axis=1), dtype=np.int64)
