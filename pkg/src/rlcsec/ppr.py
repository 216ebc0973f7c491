"""Partial packet recovery by syndrome decoding.

An eavesdropper holding ``Y = X + E`` computes ``S = H^T Y = H^T E``, keeps
only the rows it knows are corrupted (the complement of its clean set), and
for every payload column looks for the sparsest error vector ``w`` with
``Ht @ w = s``. Repaired rows that pass verification join the clean set and
RLC decoding is attempted again.

The sparsest-solution search is exhaustive in a fixed total order: weight
ascending, then supports in lexicographic order, then nonzero values in
ascending order. All L columns share one enumeration, which returns for every
column exactly what an isolated per-column search would return.
"""

from __future__ import annotations

import enum
import math
import zlib
from dataclasses import dataclass, field, replace
from itertools import combinations, product

import numpy as np

from .channel import ChannelSpec, symbol_error_prob
from .codec import CodeState, rlc_decode
from .field import matmul, pack_row
from .linalg import (
    DimensionError,
    InconsistentSystemError,
    Spark,
    as_matrix,
    complement,
    index_set,
    spark,
)

CRC_BITS = 32


class VerifyMode(enum.Enum):
    ORACLE = "oracle"
    CRC32 = "crc32"


@dataclass(frozen=True)
class SDConfig:
    """Syndrome-decoding search limits.

    ``t_max=None`` means "derive from the eavesdropper's channel" via
    :func:`default_t_max`. ``spark_max_columns`` bounds the unknown count for
    which uniqueness certificates are computed.
    """

    t_max: int | None = None
    candidate_budget: int = 2_000_000
    verify_mode: VerifyMode = VerifyMode.ORACLE
    iterate: bool = False
    spark_max_columns: int = 20

    def __post_init__(self):
        if self.t_max is not None and self.t_max < 0:
            raise ValueError("t_max must be >= 0")
        if self.candidate_budget < 1:
            raise ValueError("candidate_budget must be >= 1")

    def resolved(self, c: ChannelSpec) -> "SDConfig":
        if self.t_max is not None:
            return self
        return replace(self, t_max=default_t_max(c))


def default_t_max(c: ChannelSpec) -> int:
    return math.ceil(3 * c.L * symbol_error_prob(c)) + 2


@dataclass
class SDResult:
    """Outcome of decoding every column of a syndrome matrix."""

    W: np.ndarray  # m x L error estimate, zero in unsolved columns
    solved: np.ndarray
    certified: np.ndarray
    weights: np.ndarray  # -1 where unsolved
    budget_exhausted: bool
    candidates: int


@dataclass
class PprOutcome:
    nu: int
    repaired_indices: tuple[int, ...]
    decoded: np.ndarray | None
    columns_solved: int = 0
    columns_unique: int = 0
    budget_exhausted: bool = False
    passes: int = 0
    candidates: int = 0
    E_set: tuple[int, ...] = field(default_factory=tuple)


# -- syndrome algebra ----------------------------------------------------------


def syndrome(H, Y, q: int = 2) -> np.ndarray:
    """``S = H^T Y``."""
    H = as_matrix(H, q)
    Y = as_matrix(Y, q)
    if H.shape[0] != Y.shape[0]:
        raise DimensionError(f"H has {H.shape[0]} rows but Y has {Y.shape[0]}")
    return matmul(H.T, Y, q)


def restrict(H, Ebar, q: int = 2) -> np.ndarray:
    """Rows of H indexed by ``Ebar``, in order."""
    H = as_matrix(H, q)
    idx = index_set(Ebar, H.shape[0])
    return H[list(idx)] if idx else np.zeros((0, H.shape[1]), dtype=np.int64)


def repair(Y_Ebar, Ehat_Ebar, q: int = 2) -> np.ndarray:
    Y_Ebar = as_matrix(Y_Ebar, q)
    Ehat_Ebar = as_matrix(Ehat_Ebar, q)
    if Y_Ebar.shape != Ehat_Ebar.shape:
        raise DimensionError(f"shape mismatch {Y_Ebar.shape} vs {Ehat_Ebar.shape}")
    return (Y_Ebar - Ehat_Ebar) % q


# -- sparsest-solution search ------------------------------------------------


def _candidates(Ht: np.ndarray, q: int, t_max: int):
    """Yield ``(support, values, key)`` in search order.

    ``key`` identifies the syndrome ``Ht @ w``; it is a packed int for q = 2
    and a tuple otherwise.
    """
    m = Ht.shape[1]
    if q == 2:
        cols = [pack_row(Ht[:, j]) for j in range(m)]
        for t in range(min(t_max, m) + 1):
            for support in combinations(range(m), t):
                key = 0
                for j in support:
                    key ^= cols[j]
                yield support, None, key
        return
    for t in range(min(t_max, m) + 1):
        for support in combinations(range(m), t):
            sub = Ht[:, list(support)]
            for values in product(range(1, q), repeat=t):
                key = tuple(((sub @ np.array(values, dtype=np.int64).reshape(t)) % q).tolist())
                yield support, values, key


def _key(s: np.ndarray, q: int):
    return pack_row(s) if q == 2 else tuple(int(v) for v in s)


def _certifier(Ht: np.ndarray, q: int, cfg: SDConfig, max_weight: int):
    """Return ``w -> bool`` answering spark(Ht) > 2 * weight(w)."""
    if Ht.shape[1] > cfg.spark_max_columns or max_weight < 0:
        return lambda w: False
    if max_weight == 0:
        return lambda w: True
    sp = spark(Ht, q, cap=2 * max_weight)
    if isinstance(sp, Spark):
        return lambda w: True
    return lambda w: sp > 2 * w


def syndrome_decode(Ht, S, cfg: SDConfig, q: int = 2) -> SDResult:
    """Sparsest error estimate for every column of ``S`` given ``Ht``."""
    Ht = as_matrix(Ht, q)
    S = as_matrix(S, q)
    r, m = Ht.shape
    if S.shape[0] != r:
        raise DimensionError(f"syndrome has {S.shape[0]} rows, Ht has {r}")
    t_max = cfg.t_max if cfg.t_max is not None else m
    L = S.shape[1]
    keys = [_key(S[:, j], q) for j in range(L)]
    needed = set(keys)
    found: dict = {}
    examined = 0
    exhausted = False
    for support, values, key in _candidates(Ht, q, t_max):
        if examined == cfg.candidate_budget:
            exhausted = True
            break
        examined += 1
        if key in needed and key not in found:
            found[key] = (support, values)
            if len(found) == len(needed):
                break

    W = np.zeros((m, L), dtype=np.int64)
    solved = np.zeros(L, dtype=bool)
    weights = np.full(L, -1, dtype=np.int64)
    for j, k in enumerate(keys):
        hit = found.get(k)
        if hit is None:
            continue
        support, values = hit
        if support:
            W[list(support), j] = 1 if values is None else values
        solved[j] = True
        weights[j] = len(support)

    # soundness: every accepted column must reproduce its syndrome exactly
    if solved.any() and not np.array_equal(matmul(Ht, W[:, solved], q), S[:, solved]):
        raise InconsistentSystemError("syndrome search returned a non-solution")

    certify = _certifier(Ht, q, cfg, int(weights.max()) if L else -1)
    certified = np.array([bool(solved[j]) and certify(int(weights[j])) for j in range(L)], dtype=bool)
    return SDResult(W, solved, certified, weights, exhausted and len(found) < len(needed), examined)


def syndrome_decode_column(Ht, s, cfg: SDConfig, q: int = 2):
    """Sparsest ``w`` with ``Ht @ w = s``, as ``(w, certified)``, or None.

    ``certified`` is True when spark(Ht) > 2 * weight(w), which proves w is the
    unique sparsest solution.
    """
    s = np.asarray(s, dtype=np.int64).reshape(-1, 1)
    res = syndrome_decode(Ht, s, cfg, q)
    if not res.solved[0]:
        return None
    return res.W[:, 0].copy(), bool(res.certified[0])


# -- CRC-32 trailer ------------------------------------------------------------


def _crc_bits(body: np.ndarray) -> np.ndarray:
    data = np.packbits(body.astype(np.uint8)).tobytes()
    # xor with the CRC of zeros removes the affine part, so the map is linear
    v = zlib.crc32(data) ^ zlib.crc32(bytes(len(data)))
    return np.array([(v >> i) & 1 for i in range(CRC_BITS)], dtype=np.int64)


def attach_crc(body) -> np.ndarray:
    """Append a linear CRC-32 trailer to each binary row of ``body``.

    Linearity means any F_2 combination of protected rows is itself
    protected, so coded packets inherit valid trailers.
    """
    body = as_matrix(body, 2)
    return np.hstack([body, np.array([_crc_bits(row) for row in body]).reshape(len(body), CRC_BITS)])


def crc_ok(row) -> bool:
    row = np.asarray(row, dtype=np.int64)
    if row.size <= CRC_BITS:
        raise ValueError("row too short to carry a CRC-32 trailer")
    return bool(np.array_equal(_crc_bits(row[:-CRC_BITS]), row[-CRC_BITS:]))


# -- promotion and the full pipeline ---------------------------------------------


@dataclass
class Promotion:
    nu: int
    repaired: tuple[int, ...]
    E_set: tuple[int, ...]
    Ebar: tuple[int, ...]
    X_E: np.ndarray
    G_E: np.ndarray


def verify_and_promote(Xhat_Ebar, Ebar, E_set, G, Y, cfg: SDConfig, truth=None, q: int = 2) -> Promotion:
    """Move rows of ``Xhat_Ebar`` that pass verification from Ebar into E.

    ``truth`` (the transmitted X) is required in oracle mode. ``Y`` supplies
    the stored rows for indices already in E.
    """
    Xhat_Ebar = as_matrix(Xhat_Ebar, q)
    Ebar = tuple(Ebar)
    if Xhat_Ebar.shape[0] != len(Ebar):
        raise DimensionError("one repaired row is needed per index in Ebar")
    if cfg.verify_mode is VerifyMode.ORACLE:
        if truth is None:
            raise ValueError("oracle verification needs the transmitted rows")
        truth = as_matrix(truth, q)
        ok = [np.array_equal(Xhat_Ebar[k], truth[i]) for k, i in enumerate(Ebar)]
    else:
        if q != 2:
            raise ValueError("CRC-32 verification is defined for F_2 only")
        ok = [crc_ok(Xhat_Ebar[k]) for k in range(len(Ebar))]

    repaired = tuple(i for i, good in zip(Ebar, ok) if good)
    rows = {i: Y[i] for i in E_set}
    rows.update({i: Xhat_Ebar[k] for k, i in enumerate(Ebar) if ok[k]})
    new_E = tuple(sorted(rows))
    new_Ebar = tuple(i for i in Ebar if i not in set(repaired))
    K = G.shape[1]
    X_E = np.array([rows[i] for i in new_E], dtype=np.int64).reshape(len(new_E), Xhat_Ebar.shape[1])
    G_E = G[list(new_E)] if new_E else np.zeros((0, K), dtype=np.int64)
    return Promotion(len(repaired), repaired, new_E, new_Ebar, X_E, G_E)


def ppr_assisted_decode(state: CodeState, Y, E_set, cfg: SDConfig, truth=None) -> PprOutcome:
    """Repair corrupted rows of Y and retry RLC decoding on the enlarged set.

    ``cfg.t_max`` must already be resolved (see :meth:`SDConfig.resolved`),
    otherwise the search runs up to the number of unknowns.
    """
    q = state.spec.q
    Y = as_matrix(Y, q).copy()
    N = Y.shape[0]
    if state.emitted < N:
        raise DimensionError(f"code has {state.emitted} rows but Y has {N}")
    G = state.G[:N]
    E_set = index_set(E_set, N)
    out = PprOutcome(nu=0, repaired_indices=(), decoded=None, E_set=E_set)
    repaired: list[int] = []

    if N > state.spec.K:
        H = state.parity_check(N)
        while True:
            Ebar = complement(E_set, N)
            if not Ebar:
                break
            S = syndrome(H, Y, q)
            Ht = restrict(H, Ebar, q).T
            res = syndrome_decode(Ht, S, cfg, q)
            out.passes += 1
            out.columns_solved += int(res.solved.sum())
            out.columns_unique += int(res.certified.sum())
            out.budget_exhausted |= res.budget_exhausted
            out.candidates += res.candidates
            Xhat = repair(Y[list(Ebar)], res.W, q)
            promo = verify_and_promote(Xhat, Ebar, E_set, G, Y, cfg, truth, q)
            for k, i in enumerate(Ebar):
                if i in promo.repaired:
                    Y[i] = Xhat[k]
            repaired.extend(promo.repaired)
            E_set = promo.E_set
            if not cfg.iterate or promo.nu == 0:
                break

    out.repaired_indices = tuple(sorted(repaired))
    out.nu = len(repaired)
    out.E_set = E_set
    if E_set:
        try:
            out.decoded = rlc_decode(G[list(E_set)], Y[list(E_set)], q)
        except InconsistentSystemError:
            if cfg.verify_mode is VerifyMode.ORACLE:
                raise
            # a CRC false positive can make the enlarged system inconsistent
            out.decoded = None
    return out
