import itertools

import numpy as np
import pytest

from rlcsec.field import GF2, FieldSpec, add, inv, matmul, mul, neg, pack_row, unpack_row


def test_examples():
    F5 = FieldSpec(5)
    assert add(1, 1, GF2) == 0
    assert add(3, 4, F5) == 2
    assert mul(3, 4, F5) == 2
    assert inv(1, F5) == 1
    assert neg(1, GF2) == 1
    assert neg(0, F5) == 0
    assert neg(2, F5) == 3
    for x in F5.elements():
        assert add(0, x, F5) == x
        assert mul(1, x, F5) == x
        assert mul(0, x, F5) == 0


def test_inverse_matches_brute_force():
    F5 = FieldSpec(5)
    brute = next(b for b in F5.elements() if (3 * b) % 5 == 1)
    assert inv(3, F5) == brute == 2


def test_zero_has_no_inverse():
    with pytest.raises(ZeroDivisionError):
        inv(0, FieldSpec(5))


@pytest.mark.parametrize("q", [0, 1, 4, 6, 9])
def test_rejects_non_prime(q):
    with pytest.raises(ValueError):
        FieldSpec(q)


def test_elem_range():
    with pytest.raises(ValueError):
        FieldSpec(3).elem(3)
    assert FieldSpec(3).elem(2) == 2


@pytest.mark.parametrize("q", [2, 3, 5])
def test_field_axioms_exhaustive(q):
    f = FieldSpec(q)
    E = list(f.elements())
    for a, b in itertools.product(E, E):
        assert add(a, b, f) == add(b, a, f)
        assert mul(a, b, f) == mul(b, a, f)
        assert add(a, neg(a, f), f) == 0
    for a, b, c in itertools.product(E, E, E):
        assert add(add(a, b, f), c, f) == add(a, add(b, c, f), f)
        assert mul(mul(a, b, f), c, f) == mul(a, mul(b, c, f), f)
        assert mul(a, add(b, c, f), f) == add(mul(a, b, f), mul(a, c, f), f)
    for a in E[1:]:
        assert mul(a, inv(a, f), f) == 1


def test_gf2_is_xor_and():
    for a, b in itertools.product((0, 1), repeat=2):
        assert add(a, b) == a ^ b
        assert mul(a, b) == a & b


def test_matmul_and_packing():
    A = np.array([[1, 0], [0, 1], [1, 1]])
    U = np.array([[1, 0], [0, 1]])
    assert matmul(A, U).tolist() == [[1, 0], [0, 1], [1, 1]]
    with pytest.raises(ValueError):
        matmul(A, np.ones((3, 1)))
    row = np.array([1, 0, 1, 1, 0])
    assert unpack_row(pack_row(row), 5).tolist() == row.tolist()
