"""Arithmetic over the prime field F_q.

Elements are plain ``int`` values in ``[0, q)``; matrices elsewhere in the
package are integer numpy arrays reduced modulo ``q``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class FieldSpec:
    """The prime field F_q."""

    q: int = 2

    def __post_init__(self):
        if not _is_prime(self.q):
            raise ValueError(f"field order must be prime, got q={self.q}")

    def elem(self, value: int) -> int:
        if not 0 <= value < self.q:
            raise ValueError(f"{value} is not an element of F_{self.q}")
        return int(value)

    def elements(self) -> range:
        return range(self.q)

    def array(self, data) -> np.ndarray:
        """Coerce ``data`` to an int64 array with entries reduced mod q."""
        return np.asarray(data, dtype=np.int64) % self.q


GF2 = FieldSpec(2)


def add(a: int, b: int, f: FieldSpec = GF2) -> int:
    return (a + b) % f.q


def mul(a: int, b: int, f: FieldSpec = GF2) -> int:
    return (a * b) % f.q


def neg(a: int, f: FieldSpec = GF2) -> int:
    return (-a) % f.q


def sub(a: int, b: int, f: FieldSpec = GF2) -> int:
    return (a - b) % f.q


def inv(a: int, f: FieldSpec = GF2) -> int:
    """Multiplicative inverse via Fermat's little theorem."""
    if a % f.q == 0:
        raise ZeroDivisionError("zero has no inverse")
    return pow(a, f.q - 2, f.q)


def matmul(A: np.ndarray, B: np.ndarray, q: int = 2) -> np.ndarray:
    """Matrix product over F_q.

    Entries stay below q, so int64 accumulation cannot overflow for any
    realistic inner dimension.
    """
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    if A.shape[-1] != B.shape[0]:
        raise ValueError(f"inner dimensions differ: {A.shape} @ {B.shape}")
    return (A @ B) % q


def pack_row(row) -> int:
    """Pack a binary row into an int; entry j becomes bit j."""
    v = 0
    for j, b in enumerate(row):
        if b:
            v |= 1 << j
    return v


def unpack_row(v: int, n: int) -> np.ndarray:
    return np.array([(v >> j) & 1 for j in range(n)], dtype=np.int64)
