import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rlcsec.field import matmul, pack_row
from rlcsec.linalg import (
    DimensionError,
    RankDeficientError,
    RowBasis,
    Spark,
    complement,
    index_set,
    rank,
    rank_packed,
    row_echelon,
    solve,
    spark,
    to_standard_form,
)


def matrices(q, max_rows=6, max_cols=6):
    return st.tuples(st.integers(1, max_rows), st.integers(1, max_cols)).flatmap(
        lambda s: arrays(np.int64, s, elements=st.integers(0, q - 1)))


def spark_oracle(M, q):
    """Minimum weight of a nonzero null vector, by enumerating F_q^n."""
    n = M.shape[1]
    best = None
    for z in itertools.product(range(q), repeat=n):
        w = sum(1 for v in z if v)
        if w and not np.any((M @ np.array(z)) % q) and (best is None or w < best):
            best = w
    return Spark.INFINITE if best is None else best


def test_rank_examples():
    assert rank(np.eye(5, dtype=int)) == 5
    assert rank(np.zeros((3, 4), dtype=int)) == 0
    assert rank([[1, 0], [0, 1], [1, 1]]) == 2
    assert rank([[1, 2], [2, 4]], q=5) == 1


@pytest.mark.parametrize("q", [2, 3, 5])
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_rank_equals_transpose_rank(q, data):
    M = data.draw(matrices(q))
    assert rank(M, q) == rank(M.T, q)


@settings(max_examples=80, deadline=None)
@given(M=matrices(2, 8, 8))
def test_packed_rank_matches_unpacked(M):
    assert rank_packed(pack_row(r) for r in M) == len(row_echelon(M, 2)[1])


@pytest.mark.parametrize("q", [2, 3])
@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_row_basis_tracks_rank(q, data):
    M = data.draw(matrices(q, 8, 5))
    basis = RowBasis(M.shape[1], q)
    for i, row in enumerate(M):
        basis.add(row)
        assert basis.rank == rank(M[: i + 1], q)


def test_solve_examples():
    B = np.array([[1, 0, 1], [0, 1, 1]])
    assert np.array_equal(solve(np.eye(2, dtype=int), B), B)
    assert solve([[1, 1], [1, 1]], [[1], [1]]) is None
    A = np.array([[1, 0], [1, 1], [0, 1]])
    U0 = np.array([[1, 0], [1, 1]])
    assert np.array_equal(solve(A, matmul(A, U0)), U0)


def test_solve_errors():
    with pytest.raises(DimensionError):
        solve(np.eye(2), np.zeros((3, 1)))
    from rlcsec.linalg import InconsistentSystemError
    with pytest.raises(InconsistentSystemError):
        solve([[1, 0], [0, 1], [1, 1]], [[1], [0], [0]])


@pytest.mark.parametrize("q", [2, 3, 5])
@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_solve_round_trip(q, data):
    K = data.draw(st.integers(1, 5))
    m = data.draw(st.integers(K, K + 4))
    A = data.draw(arrays(np.int64, (m, K), elements=st.integers(0, q - 1)))
    U = data.draw(arrays(np.int64, (K, 3), elements=st.integers(0, q - 1)))
    got = solve(A, matmul(A, U, q), q)
    if rank(A, q) == K:
        assert np.array_equal(got, U)
    else:
        assert got is None


def test_standard_form_examples():
    G = np.array([[1, 0], [0, 1], [1, 1]])
    Gp, B = to_standard_form(G)
    assert np.array_equal(Gp, G) and np.array_equal(B, np.eye(2))

    G = np.array([[1, 1], [0, 1], [1, 0]])
    Gp, B = to_standard_form(G)
    assert Gp.tolist() == [[1, 0], [0, 1], [1, 1]]
    assert np.array_equal(matmul(Gp, solve(B, np.eye(2, dtype=int))), G)

    with pytest.raises(RankDeficientError):
        to_standard_form([[1, 1], [1, 1], [0, 1]])


@pytest.mark.parametrize("q", [2, 3, 5])
@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_standard_form_properties(q, data):
    K = data.draw(st.integers(1, 5))
    N = data.draw(st.integers(K, K + 5))
    G = data.draw(arrays(np.int64, (N, K), elements=st.integers(0, q - 1)))
    if rank(G[:K], q) < K:
        with pytest.raises(RankDeficientError):
            to_standard_form(G, q)
        return
    Gp, B = to_standard_form(G, q)
    assert np.array_equal(Gp, matmul(G, B, q))
    assert np.array_equal(Gp[:K], np.eye(K, dtype=np.int64))
    assert rank(B, q) == K


def test_spark_examples():
    assert spark([[1, 0, 0], [0, 0, 1]]) == 1
    assert spark(np.eye(4, dtype=int)) is Spark.INFINITE
    assert spark([[1, 0, 1], [0, 1, 1]]) == 3
    assert spark([[1, 0, 1], [0, 1, 1]], cap=2) is Spark.EXCEEDED_CAP
    assert spark(np.zeros((0, 3), dtype=int)) == 1
    with pytest.raises(ValueError):
        spark([[1]], cap=0)


@pytest.mark.parametrize("q", [2, 3])
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_spark_matches_null_space_enumeration(q, data):
    M = data.draw(matrices(q, 4, 6 if q == 2 else 5))
    assert spark(M, q) == spark_oracle(M, q)


@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_spark_at_least_two_without_zero_or_repeated_columns(data):
    r = data.draw(st.integers(2, 5))
    n = data.draw(st.integers(1, min(2**r - 1, 8)))
    cols = data.draw(st.lists(st.integers(1, 2**r - 1), min_size=n, max_size=n, unique=True))
    M = np.array([[(c >> i) & 1 for c in cols] for i in range(r)])
    s = spark(M)
    assert s is Spark.INFINITE or s >= 2


def test_index_sets():
    assert index_set([0, 2, 5], 6) == (0, 2, 5)
    assert complement((0, 2), 4) == (1, 3)
    with pytest.raises(ValueError):
        index_set([2, 1], 4)
    with pytest.raises(IndexError):
        index_set([4], 4)
