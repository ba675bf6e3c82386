"""Sampled state paths and their tabular export."""

from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray

SeedLike = int | np.random.SeedSequence


def seed_label(seed: SeedLike) -> list[int]:
    """JSON-friendly identity of a seed: entropy followed by the spawn key."""
    if isinstance(seed, np.random.SeedSequence):
        entropy = seed.entropy if isinstance(seed.entropy, int) else 0
        return [int(entropy), *(int(k) for k in seed.spawn_key)]
    return [int(seed)]


@dataclass(frozen=True)
class StatePath:
    """An immutable sampled path X_0..X_{n-1}, optionally with responses.

    Attributes:
        states: Array of shape (n, d).
        seed: Seed identity the path was drawn with.
        block: "P" (source) or "Q" (target).
        responses: Optional array of shape (n,).
    """

    states: NDArray[np.float64]
    seed: list[int] = field(default_factory=list)
    block: str = "P"
    responses: NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        states = np.array(self.states, dtype=float, copy=True)
        if states.ndim == 1:
            states = states[:, None]
        states.flags.writeable = False
        object.__setattr__(self, "states", states)
        if self.responses is not None:
            responses = np.array(self.responses, dtype=float, copy=True)
            if responses.shape != (states.shape[0],):
                raise ValueError(
                    f"responses length {responses.shape} does not match {states.shape[0]} states"
                )
            responses.flags.writeable = False
            object.__setattr__(self, "responses", responses)

    @property
    def length(self) -> int:
        return int(self.states.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.states.shape[1])

    @property
    def last_state(self) -> NDArray[np.float64]:
        return self.states[-1]

    def with_responses(self, responses: NDArray[np.float64]) -> "StatePath":
        return replace(self, responses=responses)


def path_rows(paths: Sequence[StatePath]) -> tuple[list[str], Iterator[list[object]]]:
    """Header and rows ``index,block,x_1..x_d,y`` for a set of paths.

    Rows are numbered consecutively across blocks; ``y`` is empty when a
    path carries no responses.
    """
    if not paths:
        return ["index", "block", "y"], iter(())
    dimension = paths[0].dimension
    header = ["index", "block", *(f"x_{i + 1}" for i in range(dimension)), "y"]

    def rows() -> Iterator[list[object]]:
        index = 0
        for path in paths:
            for i in range(path.length):
                y: object = "" if path.responses is None else float(path.responses[i])
                yield [index, path.block, *(float(v) for v in path.states[i]), y]
                index += 1

    return header, rows()
