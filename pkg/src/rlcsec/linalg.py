"""Dense linear algebra over F_q: rank, solve, standard form and spark.

Matrices are 2-D integer numpy arrays with entries in ``[0, q)``. Pivoting
takes the first nonzero entry, scanning from the lowest index, so every
elimination is deterministic. For q = 2, rank computations run on rows packed
into Python ints; results are identical to the unpacked path.
"""

from __future__ import annotations

import enum
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .field import pack_row


class DimensionError(ValueError):
    pass


class RankDeficientError(ValueError):
    pass


class InconsistentSystemError(RuntimeError):
    """A full-column-rank system with no solution; inputs were not ``A @ U``."""


class Spark(enum.Enum):
    INFINITE = "infinite"
    EXCEEDED_CAP = "exceeded_cap"


def as_matrix(M, q: int = 2) -> np.ndarray:
    A = np.asarray(M, dtype=np.int64)
    if A.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {A.shape}")
    return A % q


def index_set(indices: Iterable[int], n: int) -> tuple[int, ...]:
    """Validate a sorted, duplicate-free set of 0-based row indices below n."""
    idx = tuple(int(i) for i in indices)
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise ValueError(f"indices must be strictly increasing: {idx}")
    if idx and (idx[0] < 0 or idx[-1] >= n):
        raise IndexError(f"index out of range for {n} rows: {idx}")
    return idx


def complement(indices: Iterable[int], n: int) -> tuple[int, ...]:
    taken = set(indices)
    return tuple(i for i in range(n) if i not in taken)


# -- rank ------------------------------------------------------------------


def rank_packed(rows: Iterable[int]) -> int:
    basis: dict[int, int] = {}
    for v in rows:
        while v:
            h = v.bit_length() - 1
            if h in basis:
                v ^= basis[h]
            else:
                basis[h] = v
                break
    return len(basis)


def row_echelon(M, q: int = 2, pivot_cols: int | None = None):
    """Reduced row echelon form over F_q.

    Only the first ``pivot_cols`` columns are eligible as pivots; row
    operations still span the full width (useful for augmented systems).

    Returns ``(R, pivots)`` where ``pivots`` lists the pivot column of each
    leading row of ``R``.
    """
    R = as_matrix(M, q).copy()
    m, n = R.shape
    if pivot_cols is None:
        pivot_cols = n
    pivots: list[int] = []
    r = 0
    for c in range(pivot_cols):
        if r == m:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            R[[r, p]] = R[[p, r]]
        if R[r, c] != 1:
            R[r] = (R[r] * pow(int(R[r, c]), q - 2, q)) % q
        factors = R[:, c].copy()
        factors[r] = 0
        rows = np.flatnonzero(factors)
        if rows.size:
            R[rows] = (R[rows] - np.outer(factors[rows], R[r])) % q
        pivots.append(c)
        r += 1
    return R, pivots


def rank(M, q: int = 2) -> int:
    A = as_matrix(M, q)
    if A.size == 0:
        return 0
    if q == 2:
        return rank_packed(pack_row(row) for row in A)
    return len(row_echelon(A, q)[1])


class RowBasis:
    """Incrementally tracks the rank of a growing set of rows over F_q."""

    def __init__(self, ncols: int, q: int = 2):
        self.ncols = ncols
        self.q = q
        self._packed: dict[int, int] = {}
        self._rows: list[np.ndarray] = []
        self._pivots: list[int] = []

    @property
    def rank(self) -> int:
        return len(self._packed) if self.q == 2 else len(self._rows)

    def add(self, row) -> bool:
        """Insert ``row``; return True when it increases the rank."""
        if self.q == 2:
            v = row if isinstance(row, int) else pack_row(row)
            return self._add_packed(v)
        q = self.q
        v = np.asarray(row, dtype=np.int64) % q
        for b, p in zip(self._rows, self._pivots):
            if v[p]:
                v = (v - v[p] * b) % q
        nz = np.flatnonzero(v)
        if nz.size == 0:
            return False
        p = int(nz[0])
        v = (v * pow(int(v[p]), q - 2, q)) % q
        self._rows.append(v)
        self._pivots.append(p)
        return True

    def _add_packed(self, v: int) -> bool:
        basis = self._packed
        while v:
            h = v.bit_length() - 1
            if h in basis:
                v ^= basis[h]
            else:
                basis[h] = v
                return True
        return False


# -- solving and column reduction --------------------------------------------


def solve(A, B, q: int = 2) -> np.ndarray | None:
    """Solve ``A @ U = B`` for U when A has full column rank, else None."""
    A = as_matrix(A, q)
    B = as_matrix(B, q)
    if A.shape[0] != B.shape[0]:
        raise DimensionError(f"row counts differ: {A.shape} vs {B.shape}")
    m, K = A.shape
    if m < K:
        return None
    R, pivots = row_echelon(np.hstack([A, B]), q, pivot_cols=K)
    if len(pivots) < K:
        return None
    if np.any(R[K:, K:]):
        raise InconsistentSystemError("system has full column rank but no solution")
    return R[:K, K:].copy()


def to_standard_form(G, q: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Column-reduce an N x K generator into ``[I_K ; P']``.

    Returns ``(Gp, B)`` with ``Gp = G @ B`` and B invertible. Raises
    RankDeficientError when the top K x K block of G is singular.
    """
    Gp = as_matrix(G, q).copy()
    N, K = Gp.shape
    if N < K:
        raise RankDeficientError(f"need at least K={K} rows, got {N}")
    B = np.eye(K, dtype=np.int64)
    for i in range(K):
        nz = np.flatnonzero(Gp[i, i:])
        if nz.size == 0:
            raise RankDeficientError("top K x K block is rank-deficient")
        j = i + int(nz[0])
        if j != i:
            Gp[:, [i, j]] = Gp[:, [j, i]]
            B[:, [i, j]] = B[:, [j, i]]
        s = pow(int(Gp[i, i]), q - 2, q)
        Gp[:, i] = (Gp[:, i] * s) % q
        B[:, i] = (B[:, i] * s) % q
        factors = Gp[i].copy()
        factors[i] = 0
        cols = np.flatnonzero(factors)
        if cols.size:
            Gp[:, cols] = (Gp[:, cols] - np.outer(Gp[:, i], factors[cols])) % q
            B[:, cols] = (B[:, cols] - np.outer(B[:, i], factors[cols])) % q
    return Gp, B


# -- spark ------------------------------------------------------------------


def _dependent(cols: Sequence, subset, q: int, packed: bool) -> bool:
    if packed:
        # the smallest dependent set over F_2 is minimal, hence sums to zero
        x = 0
        for j in subset:
            x ^= cols[j]
        return x == 0
    return len(row_echelon(np.stack([cols[j] for j in subset]), q)[1]) < len(subset)


def spark(M, q: int = 2, cap: int | None = None) -> int | Spark:
    """Smallest number of linearly dependent columns of M.

    Exhaustive search over column subsets of increasing size, stopping at
    ``cap`` (default: the column count). Returns ``Spark.INFINITE`` when all
    columns are independent and ``Spark.EXCEEDED_CAP`` when no dependent
    subset of size <= cap exists but the columns are dependent.
    """
    A = as_matrix(M, q)
    n = A.shape[1]
    if cap is None:
        cap = n
    if cap < 1:
        raise ValueError("cap must be >= 1")
    r = rank(A, q) if A.size else 0
    if r == n:
        return Spark.INFINITE
    packed = q == 2
    cols = [pack_row(A[:, j]) for j in range(n)] if packed else [A[:, j] for j in range(n)]
    # a dependent set exists at size r + 1, so the search ends there
    for s in range(1, min(cap, r + 1) + 1):
        for subset in combinations(range(n), s):
            if _dependent(cols, subset, q, packed):
                return s
    return Spark.EXCEEDED_CAP


def spark_exceeds(M, threshold: int, q: int = 2) -> bool:
    """True when spark(M) > threshold, searching only subsets up to threshold."""
    if threshold < 1:
        return True
    result = spark(M, q, cap=threshold)
    return result in (Spark.INFINITE, Spark.EXCEEDED_CAP)
