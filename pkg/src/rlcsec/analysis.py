"""Closed-form decoding and intercept probabilities for RLC over F_q.

The intercept expression treats the destination and eavesdropper reception
processes as independent. In a real broadcast both receivers share the same
generator rows, so the formula is an approximation whose accuracy improves as
``N * eps`` grows; the simulator measures the joint process directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

_TOL = 1e-12


@dataclass(frozen=True)
class LinkParams:
    epsilon: float
    K: int
    q: int = 2
    n_max: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.n_max is not None and self.n_max < self.K:
            raise ValueError(f"n_max={self.n_max} is below K={self.K}")


def _check(p: float) -> float:
    assert -_TOL <= p <= 1 + _TOL, f"probability out of range: {p}"
    return p


@lru_cache(maxsize=None)
def p_ns(n_d: int, K: int, q: int = 2) -> float:
    """Probability that n_d uniformly random coded rows span F_q^K."""
    if n_d < K:
        return 0.0
    prod = 1.0
    for i in range(K):
        prod *= -math.expm1(-(n_d - i) * math.log(q))
    return _check(prod)


@lru_cache(maxsize=None)
def p_s(N: int, n_d: int, K: int, q: int = 2) -> float:
    """Decoding probability of systematic RLC given n_d of N rows arrived.

    Hypergeometric mixture over h, the number of systematic rows received.
    """
    if not (1 <= K <= N and 0 <= n_d <= N):
        raise ValueError(f"invalid dimensions N={N}, n_d={n_d}, K={K}")
    total_ways = math.comb(N, n_d)
    acc = 0.0
    for h in range(max(0, n_d + K - N), min(K, n_d) + 1):
        # big-int true division is correctly rounded
        w = math.comb(K, h) * math.comb(N - K, n_d - h) / total_ways
        acc += w * p_ns(n_d - h, K - h, q)
    return _check(acc)


def binom_pmf(n: int, k: int, p: float) -> float:
    """Binomial(n, p) probability of k successes, evaluated in log space."""
    if p == 0.0:
        return 1.0 if k == 0 else 0.0
    if p == 1.0:
        return 1.0 if k == n else 0.0
    return math.exp(math.log(math.comb(n, k)) + k * math.log(p) + (n - k) * math.log1p(-p))


@lru_cache(maxsize=None)
def _cdf(N: int, eps: float, K: int, q: int) -> float:
    acc = 0.0
    for n_r in range(K, N + 1):
        acc += binom_pmf(N, n_r, 1.0 - eps) * p_s(N, n_r, K, q)
    return _check(acc)


def cdf(N: int, link: LinkParams) -> float:
    """Probability the receiver can decode once N coded packets have been sent."""
    if N < link.K:
        raise ValueError(f"N={N} is below K={link.K}")
    return _cdf(N, float(link.epsilon), link.K, link.q)


def pmf(N: int, link: LinkParams) -> float:
    """Probability the receiver first becomes able to decode at packet N."""
    if N < link.K:
        raise ValueError(f"N={N} is below K={link.K}")
    if N == link.K:
        return cdf(N, link)
    return cdf(N, link) - cdf(N - 1, link)


def decoding_prob(link: LinkParams) -> float:
    if link.n_max is None:
        raise ValueError("decoding probability needs n_max")
    return cdf(link.n_max, link)


def intercept_prob(dest: LinkParams, eav: LinkParams, n_max: int) -> float:
    """Probability the eavesdropper decodes no later than the destination,
    or at all when the destination never does within n_max packets."""
    if dest.K != eav.K or dest.q != eav.q:
        raise ValueError("destination and eavesdropper links must share K and q")
    if n_max < dest.K:
        raise ValueError(f"n_max={n_max} is below K={dest.K}")
    acc = 0.0
    for N in range(dest.K, n_max + 1):
        acc += pmf(N, dest) * cdf(N, eav)
    acc += cdf(n_max, eav) * (1.0 - cdf(n_max, dest))
    return _check(acc)


class Plan(NamedTuple):
    n_max: int
    p_dec: float
    p_dec_prev: float  # decoding probability at n_max - 1, below target unless n_max == K


def plan_nmax(target: float, link: LinkParams, limit: int = 100_000) -> Plan:
    """Smallest n_max whose decoding probability reaches ``target``."""
    if not 0.0 < target < 1.0:
        raise ValueError("target must lie strictly between 0 and 1")
    if link.epsilon >= 1.0:
        raise ValueError("target unreachable: every packet is lost")
    prev = 0.0
    for N in range(link.K, limit + 1):
        F = cdf(N, link)
        if F >= target:
            return Plan(N, F, prev)
        prev = F
    raise ValueError(f"target {target} not reached by N={limit}")


def horizon(link: LinkParams, slack: float = 1e-12) -> int:
    """An n_max large enough to stand in for an unbounded transmission."""
    return plan_nmax(1.0 - slack, link).n_max
