"""Reproducible random streams.

Every replicate ``i`` of a run seeded with ``seed`` draws from its own Philox
stream keyed by ``(seed, i)``, so results do not depend on how replicates are
scheduled across threads.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator for replicate ``index`` of a run seeded with ``seed``."""
    if seed is None:
        raise ValueError("an explicit seed is required")
    seq = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(seq))


def streams(seed: int, count: int) -> list:
    return [stream(seed, i) for i in range(count)]
