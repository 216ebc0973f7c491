"""Seeded random streams.

Every stream is a numpy ``Generator`` over the counter-based Philox4x64-10
bit generator, keyed by ``SeedSequence(seed, spawn_key=path)``. A trial's
streams depend only on ``(base_seed, trial_index, purpose)``, never on which
worker runs it or in what order.
"""

from __future__ import annotations

import numpy as np

MESSAGE = 0
CODE = 1
CHANNEL_D = 2
CHANNEL_E = 3


def stream(seed: int, *path: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *path: int) -> int:
    """A 64-bit child seed, for APIs that take a plain integer seed."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, np.uint64)[0])
