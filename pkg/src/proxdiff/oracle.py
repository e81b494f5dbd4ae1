"""Exact reference computations used to cross-check the main code paths.

Nothing here imports the series or operator machinery: polynomials are plain
dictionaries of exact rationals, operators act through the explicit formula

    P f = sum_gamma f_gamma sum_{alpha <= gamma} a_alpha(z) gamma!/(gamma-alpha)! z^(gamma-alpha),

and monomial norms on constant orders come from the calculus maximizer.
The module also owns the seeded random corpus and its digest manifest.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from fractions import Fraction

from ._numbers import GaussianRational, format_value, mp, to_mp

CORPUS_SEEDS = tuple(range(100))
MAX_NUMERATOR = 1000


class RationalPoly:
    """Finite-support polynomial ``alpha -> coefficient`` with exact arithmetic."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: dict | None = None):
        self.n = n
        self.coeffs = {tuple(a): v for a, v in (coeffs or {}).items() if v}

    @classmethod
    def monomial(cls, alpha, c=1):
        return cls(len(alpha), {tuple(alpha): Fraction(c) if isinstance(c, int) else c})

    def __add__(self, other):
        out = dict(self.coeffs)
        for a, v in other.coeffs.items():
            out[a] = out.get(a, 0) + v
        return RationalPoly(self.n, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        return RationalPoly(self.n, {a: c * v for a, v in self.coeffs.items()})

    def __mul__(self, other):
        out: dict = {}
        for a, v in self.coeffs.items():
            for b, w in other.coeffs.items():
                key = tuple(x + y for x, y in zip(a, b))
                out[key] = out.get(key, 0) + v * w
        return RationalPoly(self.n, out)

    def derivative(self, alpha):
        out = {}
        for beta, v in self.coeffs.items():
            if all(b >= a for a, b in zip(alpha, beta)):
                k = 1
                for a, b in zip(alpha, beta):
                    k *= math.perm(b, a)
                out[tuple(b - a for a, b in zip(alpha, beta))] = v * k
        return RationalPoly(self.n, out)

    def shift(self, c):
        """Substitute z -> z + c (componentwise c)."""
        out = RationalPoly(self.n)
        for alpha, v in self.coeffs.items():
            term = RationalPoly(self.n, {(0,) * self.n: v})
            for i, a in enumerate(alpha):
                lin = RationalPoly(self.n, {_unit(self.n, i): Fraction(1), (0,) * self.n: c[i]})
                for _ in range(a):
                    term = term * lin
            out = out + term
        return out

    def degree(self) -> int:
        return max((sum(a) for a in self.coeffs), default=-1)

    def __eq__(self, other):
        return isinstance(other, RationalPoly) and self.n == other.n and self.coeffs == other.coeffs

    def __repr__(self):
        return f"RationalPoly(n={self.n}, {self.coeffs})"


def _unit(n, i):
    return tuple(1 if j == i else 0 for j in range(n))


def _below(alpha):
    if not alpha:
        yield ()
        return
    for a0 in range(alpha[0] + 1):
        for rest in _below(alpha[1:]):
            yield (a0,) + rest


def exact_apply(symbol: dict, f: RationalPoly) -> RationalPoly:
    """Apply ``sum_alpha a_alpha(z) d^alpha`` (a finite table of RationalPoly) to f exactly."""
    out = RationalPoly(f.n)
    for gamma, fg in f.coeffs.items():
        for alpha in _below(gamma):
            a = symbol.get(alpha)
            if a is None:
                continue
            k = 1
            for g, al in zip(gamma, alpha):
                k *= math.factorial(g) // math.factorial(g - al)
            rest = tuple(g - al for g, al in zip(gamma, alpha))
            out = out + a * RationalPoly(f.n, {rest: fg * k})
    return out


def closed_form_monomial_norm(q: int, rho, sigma, family: str = "constant"):
    """sup_r r^q exp(-sigma r^rho) = (q/(e sigma rho))^(q/rho), for constant orders."""
    if family != "constant":
        raise NotImplementedError("closed-form monomial norms exist for constant orders only")
    if q == 0:
        return mp.one
    rho, sigma = to_mp(rho), to_mp(sigma)
    return mp.exp(q / rho * mp.log(q / (mp.e * sigma * rho)))


def stirling_refs(q: int):
    """(ln q!, ln (2q-1)!!) by direct summation of logarithms."""
    if q < 0:
        raise ValueError("q must be >= 0")
    ln_fact = mp.fsum(mp.log(k) for k in range(2, q + 1))
    ln_dfact = mp.fsum(mp.log(2 * k - 1) for k in range(1, q + 1))
    return ln_fact, ln_dfact


# ---------------------------------------------------------------------------
# seeded corpus


def _rand_rational(rng: random.Random, complex_: bool = False):
    def one():
        return Fraction(rng.randint(-MAX_NUMERATOR, MAX_NUMERATOR), rng.randint(1, MAX_NUMERATOR))
    if complex_:
        return GaussianRational(one(), one())
    return one()


def _all_indices(n, q_max):
    out = []
    for alpha in _below((q_max,) * n):
        if sum(alpha) <= q_max:
            out.append(alpha)
    return sorted(out, key=lambda a: (sum(a), tuple(-x for x in a)))


def random_poly(rng: random.Random, n: int, degree: int, terms: int, complex_: bool = False):
    idx = _all_indices(n, degree)
    chosen = rng.sample(idx, min(terms, len(idx)))
    return RationalPoly(n, {a: _rand_rational(rng, complex_) for a in chosen})


def random_symbol(seed: int, n: int | None = None, a_max: int = 6, degree: int = 6,
                  density: float = 0.5):
    """Seeded random symbol table ``alpha -> RationalPoly`` with |alpha| <= a_max."""
    rng = random.Random(seed)
    n = n if n is not None else rng.choice((1, 2, 3))
    table = {}
    for alpha in _all_indices(n, a_max):
        if rng.random() < density:
            table[alpha] = random_poly(rng, n, rng.randint(0, degree), rng.randint(1, 3))
    return n, table


def random_images(seed: int, n: int | None = None, b_max: int = 10, degree: int = 4):
    """Seeded random monomial images ``beta -> F(z^beta)/beta!``."""
    rng = random.Random(10_000 + seed)
    n = n if n is not None else rng.choice((1, 2))
    return n, {beta: random_poly(rng, n, rng.randint(0, degree), rng.randint(1, 3))
               for beta in _all_indices(n, b_max)}


def poly_json(p: RationalPoly) -> dict:
    items = sorted(p.coeffs.items(), key=lambda kv: (sum(kv[0]), tuple(-x for x in kv[0])))
    return {"n": p.n, "coefficients": [{"alpha": list(a), "value": format_value(v)}
                                       for a, v in items]}


def images_from_symbol(n: int, table: dict, b_max: int) -> dict:
    """Oracle images b_beta = P(z^beta)/beta! through :func:`exact_apply`."""
    out = {}
    for beta in _all_indices(n, b_max):
        img = exact_apply(table, RationalPoly.monomial(beta, 1))
        out[beta] = img.scale(Fraction(1, math.prod(math.factorial(b) for b in beta)))
    return out


def corpus_digest(seed: int) -> str:
    n, table = random_symbol(seed)
    images = images_from_symbol(n, table, 6)
    payload = json.dumps({"n": n, "images": [[list(b), poly_json(p)] for b, p in images.items()]},
                         sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


def build_manifest(seeds=CORPUS_SEEDS) -> dict:
    sizes = {}
    for seed in seeds:
        n, table = random_symbol(seed)
        sizes[str(seed)] = {"n": n, "entries": len(table)}
    return {"seeds": list(seeds), "a_max": 6, "degree": 6, "sizes": sizes,
            "digests": {str(s): corpus_digest(s) for s in seeds}}
