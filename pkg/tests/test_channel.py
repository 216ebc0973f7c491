import mpmath
import numpy as np
import pytest

from rlcsec.channel import ChannelSpec, symbol_error_prob, transmit, transmit_block


def oracle_p(eps, L):
    mpmath.mp.dps = 40
    return float(1 - mpmath.power(1 - mpmath.mpf(eps), mpmath.mpf(1) / L))


@pytest.mark.parametrize("eps,L", [(0.1, 128), (0.01, 128), (0.5, 64), (0.3, 1), (1e-9, 1024)])
def test_symbol_error_prob_matches_high_precision(eps, L):
    assert symbol_error_prob(ChannelSpec(eps, L)) == pytest.approx(oracle_p(eps, L), rel=1e-12)


def test_symbol_error_prob_reference_value():
    # frozen from the mpmath oracle above
    assert symbol_error_prob(ChannelSpec(0.1, 128)) == pytest.approx(8.227904e-4, rel=1e-6)


def test_edge_epsilons():
    rng = np.random.default_rng(0)
    X = rng.integers(0, 2, size=(50, 16))
    Y, E, clean = transmit_block(X, ChannelSpec(0.0, 16), rng)
    assert clean.all() and np.array_equal(X, Y) and not E.any()
    Y, E, clean = transmit_block(X, ChannelSpec(1.0, 16), rng)
    assert not clean.any() and E.all()


def test_validation():
    with pytest.raises(ValueError):
        ChannelSpec(1.5, 8)
    with pytest.raises(ValueError):
        ChannelSpec(0.1, 0)
    with pytest.raises(ValueError):
        transmit_block(np.zeros((2, 5)), ChannelSpec(0.1, 4), np.random.default_rng(0))


def test_clean_rate_within_three_sigma():
    eps, n = 0.2, 100_000
    rng = np.random.default_rng(7)
    _, _, clean = transmit_block(np.zeros((n, 128), dtype=np.int64), ChannelSpec(eps, 128), rng)
    sigma = np.sqrt(eps * (1 - eps) / n)
    assert abs((1 - clean.mean()) - eps) < 3 * sigma


def test_error_pattern_invariants():
    c = ChannelSpec(0.3, 128)
    rng = np.random.default_rng(1)
    X = rng.integers(0, 2, size=(20_000, 128))
    Y, E, clean = transmit_block(X, c, rng)
    assert np.array_equal((X + E) % 2, Y)
    assert np.array_equal(clean, ~E.any(axis=1))
    p = symbol_error_prob(c)
    assert E.mean() <= 2 * p
    assert E.mean() == pytest.approx(p, rel=0.05)


def test_no_correlation_between_neighbouring_symbols():
    rng = np.random.default_rng(2)
    _, E, _ = transmit_block(np.zeros((20_000, 64), dtype=np.int64), ChannelSpec(0.9, 64), rng)
    a, b = E[:, :-1].ravel().astype(float), E[:, 1:].ravel().astype(float)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.01


def test_odd_field_corruptions_change_the_symbol():
    rng = np.random.default_rng(3)
    X = rng.integers(0, 5, size=(2000, 32))
    Y, E, _ = transmit_block(X, ChannelSpec(0.6, 32), rng, q=5)
    hit = E != 0
    assert hit.any()
    assert np.all(Y[hit] != X[hit]) and np.all(Y[~hit] == X[~hit])
    assert set(np.unique(E[hit])) == {1, 2, 3, 4}


def test_transmit_single_row():
    r = transmit(np.ones(8, dtype=np.int64), ChannelSpec(0.0, 8), np.random.default_rng(0))
    assert r.clean and r.payload.tolist() == [1] * 8
