"""Exact reference harness: polynomial algebra, closed forms and the corpus."""

import json
import math
import random
from fractions import Fraction
from pathlib import Path

import pytest

from proxdiff import DomainError, GaussianRational, mp
from proxdiff.oracle import (
    CORPUS_SEEDS,
    RationalPoly,
    build_manifest,
    closed_form_monomial_norm,
    corpus_digest,
    exact_apply,
    images_from_symbol,
    random_images,
    random_poly,
    random_symbol,
    stirling_refs,
)

MANIFEST = Path(__file__).parent / "data" / "corpus_manifest.json"
ONE = RationalPoly(1, {(0,): Fraction(1)})


def poly1(*coeffs):
    return RationalPoly(1, {(q,): Fraction(c) for q, c in enumerate(coeffs)})


class TestRationalPoly:
    def test_zero_coefficients_dropped(self):
        assert poly1(0, 1, 0).coeffs == {(1,): 1}

    def test_arithmetic(self):
        p, q = poly1(1, 1), poly1(-1, 1)
        assert p * q == poly1(-1, 0, 1)
        assert p + q == poly1(0, 2)
        assert p - p == RationalPoly(1)
        assert p.scale(Fraction(1, 2)) == poly1(Fraction(1, 2), Fraction(1, 2))

    def test_derivative(self):
        assert poly1(5, 0, 0, 1).derivative((1,)) == poly1(0, 0, 3)
        assert poly1(5, 0, 0, 1).derivative((4,)) == RationalPoly(1)

    def test_shift_binomial(self):
        assert poly1(0, 0, 1).shift((1,)) == poly1(1, 2, 1)
        p = RationalPoly(2, {(1, 1): Fraction(1)})
        assert p.shift((2, -1)) == RationalPoly(2, {(1, 1): 1, (1, 0): -1, (0, 1): 2, (0, 0): -2})

    def test_gaussian_shift(self):
        i = GaussianRational(0, 1)
        p = poly1(0, 0, 1).shift((i,))
        assert p.coeffs[(0,)] == GaussianRational(-1, 0) and p.coeffs[(1,)] == 2 * i

    def test_degree(self):
        assert RationalPoly(1).degree() == -1 and poly1(1, 0, 3).degree() == 2


class TestExactApply:
    def test_first_derivative(self):
        assert exact_apply({(1,): ONE}, poly1(0, 0, 0, 1)) == poly1(0, 0, 3)

    def test_shift(self):
        table = {(j,): ONE.scale(Fraction(1, math.factorial(j))) for j in range(4)}
        assert exact_apply(table, poly1(0, 0, 1)) == poly1(1, 2, 1)

    def test_linear(self):
        n, table = random_symbol(5)
        rng = random.Random(5)
        f, g = random_poly(rng, n, 6, 4), random_poly(rng, n, 6, 4)
        c1, c2 = Fraction(3, 7), Fraction(-2)
        lhs = exact_apply(table, f.scale(c1) + g.scale(c2))
        assert lhs == exact_apply(table, f).scale(c1) + exact_apply(table, g).scale(c2)

    def test_variable_coefficient(self):
        # z * d/dz is the Euler operator: z^q -> q z^q
        table = {(1,): poly1(0, 1)}
        assert exact_apply(table, poly1(1, 1, 1, 1)) == poly1(0, 1, 2, 3)


class TestClosedForms:
    def test_values(self):
        assert abs(closed_form_monomial_norm(1, 1, 1) - 1 / mp.e) < mp.mpf(10) ** -70
        assert closed_form_monomial_norm(0, 2, 3) == 1
        assert abs(closed_form_monomial_norm(4, 2, 1) - (2 / mp.e) ** 2) < mp.mpf(10) ** -70

    def test_non_constant(self):
        with pytest.raises(NotImplementedError):
            closed_form_monomial_norm(3, 2, 1, family="loglog")

    def test_stirling(self):
        assert abs(stirling_refs(5)[0] - mp.log(120)) < mp.mpf(10) ** -70
        assert abs(stirling_refs(3)[1] - mp.log(15)) < mp.mpf(10) ** -70

    @pytest.mark.parametrize("j", [0, 1, 7, 50, 300])
    def test_double_factorial_identity(self, j):
        ln_2j_fact = stirling_refs(2 * j)[0]
        ln_dfact = stirling_refs(j)[1]
        ln_j_fact = stirling_refs(j)[0]
        assert abs(ln_2j_fact - (ln_dfact + j * mp.log(2) + ln_j_fact)) < mp.mpf(10) ** -60

    def test_negative(self):
        with pytest.raises(ValueError):
            stirling_refs(-1)


class TestCorpus:
    def test_seeds(self):
        assert CORPUS_SEEDS == tuple(range(100))

    def test_deterministic(self):
        assert random_symbol(17) == random_symbol(17)
        assert random_images(4) == random_images(4)

    def test_shape(self):
        for seed in range(20):
            n, table = random_symbol(seed)
            assert n in (1, 2, 3)
            for alpha, p in table.items():
                assert len(alpha) == n and sum(alpha) <= 6 and p.degree() <= 6
                for v in p.coeffs.values():
                    assert abs(v.numerator) <= 1000 and v.denominator <= 1000

    def test_images_cover_all_betas(self):
        n, images = random_images(2)
        assert len(images) == math.comb(10 + n, n)

    def test_images_from_symbol_definition(self):
        n, table = random_symbol(8)
        images = images_from_symbol(n, table, 4)
        for beta, img in images.items():
            mono = RationalPoly(n, {beta: Fraction(1)})
            fact = math.prod(math.factorial(b) for b in beta)
            assert img.scale(fact) == exact_apply(table, mono)

    def test_manifest_matches_frozen_copy(self):
        frozen = json.loads(MANIFEST.read_text())
        assert build_manifest() == frozen

    def test_digest_sensitive_to_seed(self):
        assert corpus_digest(0) != corpus_digest(1)


def test_gaussian_rational_arithmetic():
    a = GaussianRational(Fraction(1, 2), 2)
    b = GaussianRational(-1, Fraction(1, 3))
    assert (a * b).re == Fraction(-1, 2) - Fraction(2, 3)
    assert a + b == GaussianRational(Fraction(-1, 2), Fraction(7, 3))
    with pytest.raises((ZeroDivisionError, DomainError)):
        a / GaussianRational(0, 0)
