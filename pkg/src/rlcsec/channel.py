"""Memoryless symbol-error channel.

Each of the L symbols of a packet is corrupted independently with probability
``p = 1 - (1 - eps)**(1/L)``, so a packet arrives intact with probability
exactly ``1 - eps``. A corrupted F_2 symbol flips. For q > 2 a corrupted
symbol is replaced by a uniformly chosen *different* element; that model is
our own choice for odd-prime fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelSpec:
    epsilon: float
    L: int

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.L < 1:
            raise ValueError("L must be >= 1")


@dataclass
class Reception:
    payload: np.ndarray
    clean: bool
    error_vector: np.ndarray


def symbol_error_prob(c: ChannelSpec) -> float:
    if c.epsilon >= 1.0:
        return 1.0
    return -math.expm1(math.log1p(-c.epsilon) / c.L)


def transmit_block(rows, c: ChannelSpec, rng: np.random.Generator, q: int = 2):
    """Send each row of ``rows`` (n x L) through the channel.

    Draws the error count of each packet as Binomial(L, p) and then a uniform
    set of that many positions, which is the same law as L independent
    Bernoulli(p) symbol trials but far cheaper when p is small.

    Returns ``(payloads, errors, clean)``.
    """
    X = np.asarray(rows, dtype=np.int64)
    n, L = X.shape
    if L != c.L:
        raise ValueError(f"row length {L} does not match channel L={c.L}")
    p = symbol_error_prob(c)
    errors = np.zeros_like(X)
    counts = rng.binomial(L, p, size=n)
    for i in np.flatnonzero(counts):
        pos = rng.choice(L, size=int(counts[i]), replace=False)
        if q == 2:
            errors[i, pos] = 1
        else:
            errors[i, pos] = rng.integers(1, q, size=pos.size)
    return (X + errors) % q, errors, counts == 0


def transmit(row, c: ChannelSpec, rng: np.random.Generator, q: int = 2) -> Reception:
    payloads, errors, clean = transmit_block(np.asarray(row)[None, :], c, rng, q)
    return Reception(payloads[0], bool(clean[0]), errors[0])
