"""Generator construction, encoding, parity checks and RLC decoding."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .field import matmul
from .linalg import (
    DimensionError,
    RankDeficientError,
    as_matrix,
    rank,
    solve,
    to_standard_form,
)

log = logging.getLogger(__name__)


class Kind(enum.Enum):
    NON_SYSTEMATIC = "nonsystematic"
    SYSTEMATIC = "systematic"
    FULL_RANK_NON_SYSTEMATIC = "fullrank"


@dataclass(frozen=True)
class GeneratorSpec:
    kind: Kind
    K: int
    seed: int
    q: int = 2

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")


class CodeState:
    """A generator matrix grown one row per transmitted packet.

    Rows come from a single Philox stream keyed by ``spec.seed``. For the
    full-rank construction the first K rows are drawn as a block and redrawn
    from the same stream until the block is invertible; ``top_block_attempts``
    records how many draws that took.
    """

    def __init__(self, spec: GeneratorSpec):
        self.spec = spec
        self._rng = rngmod.stream(spec.seed)
        self._rows: list[np.ndarray] = []
        self._cache: dict[tuple, tuple] = {}
        self.emitted = 0
        self.top_block_attempts = 0

    @property
    def N(self) -> int:
        return self.emitted

    @property
    def G(self) -> np.ndarray:
        if not self.emitted:
            return np.zeros((0, self.spec.K), dtype=np.int64)
        return np.array(self._rows[: self.emitted], dtype=np.int64)

    def _draw(self, n: int) -> np.ndarray:
        return self._rng.integers(0, self.spec.q, size=(n, self.spec.K), dtype=np.int64)

    def _init_top(self):
        K, q = self.spec.K, self.spec.q
        if self.spec.kind is Kind.SYSTEMATIC:
            block = np.eye(K, dtype=np.int64)
        else:
            while True:
                self.top_block_attempts += 1
                block = self._draw(K)
                if rank(block, q) == K:
                    break
            if self.top_block_attempts > 1:
                log.debug("full-rank top block after %d draws", self.top_block_attempts)
        self._rows.extend(block)

    def grow(self) -> np.ndarray:
        """Append and return the generator row of the next transmitted packet."""
        if self.emitted == 0 and self.spec.kind is not Kind.NON_SYSTEMATIC:
            self._init_top()
        if self.emitted == len(self._rows):
            self._rows.append(self._draw(1)[0])
        row = self._rows[self.emitted]
        self.emitted += 1
        return row

    def grow_to(self, N: int) -> np.ndarray:
        while self.emitted < N:
            self.grow()
        return self.G[:N]

    def standard_form(self, N: int | None = None):
        """Cached ``(Gp, B)`` for the first N emitted rows."""
        N = self.emitted if N is None else N
        key = ("sf", N)
        if key not in self._cache:
            self._cache[key] = to_standard_form(self.G[:N], self.spec.q)
        return self._cache[key]

    def parity_check(self, N: int | None = None) -> np.ndarray:
        N = self.emitted if N is None else N
        key = ("H", N)
        if key not in self._cache:
            Gp, _ = self.standard_form(N)
            self._cache[key] = parity_check(Gp, self.spec.q)
        return self._cache[key]


def build_generator(spec: GeneratorSpec, N: int) -> np.ndarray:
    """The first N rows of the generator defined by ``spec``."""
    if spec.kind is not Kind.NON_SYSTEMATIC and N < spec.K:
        raise ValueError(f"N={N} < K={spec.K} for a systematic construction")
    return CodeState(spec).grow_to(N)


def encode(G, U, q: int = 2) -> np.ndarray:
    G = as_matrix(G, q)
    U = as_matrix(U, q)
    if G.shape[1] != U.shape[0]:
        raise DimensionError(f"cannot encode {U.shape} message with {G.shape} generator")
    return matmul(G, U, q)


def parity_check(Gp, q: int = 2) -> np.ndarray:
    """Parity-check matrix ``H = [-P' | I_{N-K}]^T`` of a standard-form generator.

    ``H.T @ G == 0`` holds for Gp and for any G with ``Gp = G @ B``, B invertible.
    """
    Gp = as_matrix(Gp, q)
    N, K = Gp.shape
    if N <= K:
        raise ValueError(f"no parity rows exist for N={N}, K={K}")
    if not np.array_equal(Gp[:K], np.eye(K, dtype=np.int64)):
        raise RankDeficientError("generator is not in standard form")
    Ht = np.hstack([(-Gp[K:]) % q, np.eye(N - K, dtype=np.int64)])
    return Ht.T.copy()


def rlc_decode(G_R, X_R, q: int = 2) -> np.ndarray | None:
    """Recover U from received rows, or None when rank(G_R) < K."""
    G_R = as_matrix(G_R, q)
    X_R = as_matrix(X_R, q)
    if G_R.shape[0] != X_R.shape[0]:
        raise DimensionError(f"row counts differ: {G_R.shape} vs {X_R.shape}")
    return solve(G_R, X_R, q)
