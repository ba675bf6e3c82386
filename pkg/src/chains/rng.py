"""Named random streams derived from one root seed.

A run has a single root seed. Each component draws from its own stream
(path-P, path-Q, noise-P, noise-Q, test) and each replication gets its own
child of that stream, so any component can be regenerated in isolation and
replications can run in any order.
"""

from enum import StrEnum

import numpy as np


class Stream(StrEnum):
    PATH_P = "path-P"
    PATH_Q = "path-Q"
    NOISE_P = "noise-P"
    NOISE_Q = "noise-Q"
    TEST = "test"


_STREAM_INDEX = {stream: index for index, stream in enumerate(Stream)}


def stream_seed(root_seed: int, stream: Stream, replication: int = 0) -> np.random.SeedSequence:
    """Seed of one named stream for one replication."""
    return np.random.SeedSequence(
        entropy=root_seed, spawn_key=(_STREAM_INDEX[stream], replication)
    )


def stream_rng(root_seed: int, stream: Stream, replication: int = 0) -> np.random.Generator:
    return np.random.default_rng(stream_seed(root_seed, stream, replication))


def split_seed(seed: int | np.random.SeedSequence, parts: int) -> list[np.random.SeedSequence]:
    """Independent child seeds of an arbitrary seed.

    Unlike ``SeedSequence.spawn`` this does not advance the parent, so
    splitting the same seed twice yields the same children.
    """
    if isinstance(seed, np.random.SeedSequence):
        entropy, key = seed.entropy, tuple(seed.spawn_key)
    else:
        entropy, key = seed, ()
    return [np.random.SeedSequence(entropy, spawn_key=(*key, i)) for i in range(parts)]
