"""Multi-index helpers: weights, factorials, partial order, enumeration.

Multi-indices are plain tuples of non-negative ints.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

from ._numbers import mp

MultiIndex = tuple

_LOG_DOMAIN_CUTOFF = 1000


def weight(alpha: MultiIndex) -> int:
    return sum(alpha)


def factorial(alpha: MultiIndex) -> int:
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return out


@lru_cache(maxsize=8192)
def _ln_fact_at(k: int, prec: int):
    if k > _LOG_DOMAIN_CUTOFF:
        return mp.loggamma(k + 1)
    return mp.log(math.factorial(k))


def _ln_fact(k: int):
    return _ln_fact_at(k, mp.prec)


def ln_factorial(alpha: MultiIndex):
    """ln(alpha!) at working precision (log-gamma beyond 10^3)."""
    return mp.fsum(_ln_fact(a) for a in alpha)


def binom(alpha: MultiIndex, beta: MultiIndex) -> int:
    out = 1
    for a, b in zip(alpha, beta):
        out *= math.comb(a, b)
    return out


def ln_binom(alpha: MultiIndex, beta: MultiIndex):
    return ln_factorial(alpha) - ln_factorial(beta) - ln_factorial(sub(alpha, beta))


def leq(beta: MultiIndex, alpha: MultiIndex) -> bool:
    """Componentwise ``beta <= alpha``."""
    return all(b <= a for b, a in zip(beta, alpha))


def add(alpha: MultiIndex, beta: MultiIndex) -> MultiIndex:
    return tuple(a + b for a, b in zip(alpha, beta))


def sub(alpha: MultiIndex, beta: MultiIndex) -> MultiIndex:
    return tuple(a - b for a, b in zip(alpha, beta))


def zero(n: int) -> MultiIndex:
    return (0,) * n


def unit(n: int, i: int) -> MultiIndex:
    return tuple(1 if j == i else 0 for j in range(n))


@lru_cache(maxsize=1024)
def of_weight(n: int, q: int) -> tuple[MultiIndex, ...]:
    """All alpha in N^n with |alpha| = q, in lexicographically decreasing order."""
    if n == 1:
        return ((q,),)
    out = []
    for first in range(q, -1, -1):
        for rest in of_weight(n - 1, q - first):
            out.append((first,) + rest)
    return tuple(out)


def up_to_weight(n: int, q_max: int):
    for q in range(q_max + 1):
        yield from of_weight(n, q)


def below(alpha: MultiIndex):
    """All beta <= alpha."""
    return itertools.product(*(range(a + 1) for a in alpha))


def multi_choose(n: int, q: int) -> int:
    """Number of n-variable multi-indices of weight q: binom(n+q-1, q)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    value = math.comb(n + q - 1, q)
    assert value <= (q + 1) ** (n - 1)
    return value


def ln_sphere_sup(alpha: MultiIndex):
    """ln sup_{|z|=1} |z^alpha| = (1/2) sum alpha_i ln(alpha_i/|alpha|)."""
    q = weight(alpha)
    if q == 0:
        return mp.zero
    lq = mp.log(q)
    return mp.fsum(a * (mp.log(a) - lq) for a in alpha if a) / 2
