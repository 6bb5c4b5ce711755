"""Deterministic, counter-based random streams.

Every stochastic component draws from its own Philox stream keyed by
``(seed, *path)``.  Streams are independent of each other and of execution
order, which is what makes parallel trials reproduce the sequential run
byte for byte.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(seed: int, *path: int) -> np.random.Generator:
    """Philox-backed generator for the component identified by ``path``."""
    ss = np.random.SeedSequence(
        entropy=int(seed) & _MASK64,
        spawn_key=tuple(int(p) & _MASK64 for p in path),
    )
    return np.random.Generator(np.random.Philox(ss))
