"""Entire series: profiles, weighted norms, type estimation and membership."""

import itertools
import json
import math
from fractions import Fraction

import numpy as np
import pytest

from proxdiff import (
    DomainError,
    EntireSeries,
    PreconditionError,
    ProximateOrder,
    classify_coeff_bound,
    classify_minimal_type,
    classify_normal_type,
    derivative_norm_check,
    estimate_type,
    exp_series,
    growth_scale,
    hom_norm_profile,
    monomial_norm_check,
    mp,
    multi_choose,
    normalize,
    partial_sum_residual,
    weighted_norm,
)
from proxdiff.series import (
    INCONCLUSIVE,
    MEMBER,
    NOT_MEMBER,
    exp_of_power_series,
    ln_monomial_norm,
    weighted_norm_details,
)

# Stirling-free references from 50-digit log-gamma evaluation at q = 400
SIGMA_HAT_EXP2Z_400 = mp.mpf("1.9805210818018980741105921077072934950850207562869")
SIGMA_HAT_EXPZ2_400 = mp.mpf("0.98231566671694986728027843911614026567188490964397")
# sum_{q=101}^{200} (q/(1.1 e))^q / q!
RESIDUAL_EXPZ_100 = mp.mpf("0.0000275367005938352547792843271549886336628208528464123930672451")


def rel(a, b):
    return abs(mp.mpf(a) / mp.mpf(b) - 1)


@pytest.fixture(scope="module")
def scale1(const1):
    return growth_scale(const1, 400)


@pytest.fixture(scope="module")
def scale2(const2):
    return growth_scale(const2, 400)


class TestEntireSeries:
    def test_zero_coefficients_dropped(self):
        f = EntireSeries(1, 3, {(0,): 1, (2,): 0})
        assert f.coeffs == {(0,): Fraction(1)}
        assert f == EntireSeries.univariate([1])

    def test_bad_index(self):
        with pytest.raises(DomainError):
            EntireSeries(2, 3, {(1,): 1})
        with pytest.raises(DomainError):
            EntireSeries(1, 3, {(4,): 1})

    def test_derivative(self):
        f = EntireSeries.monomial((3, 2), Fraction(1, 2))
        d = f.derivative((1, 2))
        assert d.coeffs == {(2, 0): Fraction(3)}
        assert f.derivative((4, 0)).coeffs == {}

    def test_exp_series(self):
        f = exp_series(2, 5)
        assert f[(5,)] == Fraction(32, 120)
        assert f.value_kind == "rational"
        assert exp_series(mp.mpf("0.5"), 3).value_kind == "real"

    def test_product(self):
        f = EntireSeries.univariate([1, 1])
        assert (f * f) == EntireSeries.univariate([1, 2, 1])

    def test_json_round_trip(self):
        f = EntireSeries(2, 3, {(1, 2): Fraction(-3, 7), (0, 0): mp.mpf("0.25"),
                                (1, 0): mp.mpc(1, -2)})
        g = EntireSeries.from_json(json.loads(json.dumps(f.to_json())))
        assert g == f

    def test_json_duplicate(self):
        obj = {"n": 1, "q_max": 1, "coefficients": [{"alpha": [1], "value": "1"},
                                                     {"alpha": [1], "value": "2"}]}
        with pytest.raises(DomainError):
            EntireSeries.from_json(obj)


class TestProfile:
    def test_one_variable_is_exact(self):
        f = exp_series(1, 200)
        p = hom_norm_profile(f)
        assert p.ln_K_lower == p.ln_K_upper
        assert abs(p.ln_K_upper[200] + mp.loggamma(201)) < 1e-60

    def test_z1z2(self):
        p = hom_norm_profile(EntireSeries.monomial((1, 1)))
        assert p.ln_K_upper[2] == 0
        assert p.ln_K_lower[2] >= mp.log(mp.mpf(1) / 2) - 1e-12

    def test_brute_force_sphere_grid(self):
        # (z1 + z2)^2 / 2 has sup 1 on the unit ball, reached at (1,1)/sqrt 2
        f = EntireSeries(2, 2, {(2, 0): Fraction(1, 2), (1, 1): 1, (0, 2): Fraction(1, 2)})
        p = hom_norm_profile(f)
        th = np.linspace(0, np.pi / 2, 201)
        ph = np.linspace(0, 2 * np.pi, 201)
        T, P = np.meshgrid(th, ph)
        z1, z2 = np.cos(T), np.sin(T) * np.exp(1j * P)
        brute = np.abs(0.5 * (z1 + z2) ** 2).max()
        assert float(p.ln_K_lower[2]) <= math.log(brute) + 1e-9 + 1e-3
        assert float(p.ln_K_lower[2]) >= math.log(brute) - 1e-6
        assert p.ln_K_lower[2] <= p.ln_K_upper[2]

    def test_zero_part(self):
        p = hom_norm_profile(EntireSeries(1, 2, {(2,): 1}))
        assert p.ln_K_lower[1] == p.ln_K_upper[1] == mp.ninf

    def test_samples_guard(self):
        with pytest.raises(PreconditionError):
            hom_norm_profile(EntireSeries.monomial((1,)), samples=0)


class TestWeightedNorm:
    def test_constant(self, loglog):
        assert weighted_norm(EntireSeries.constant(1), loglog, 1) == 1

    def test_z_rho1(self, const1):
        assert rel(weighted_norm(EntireSeries.monomial((1,)), const1, 1), 1 / mp.e) < 1e-30

    def test_z4_rho2(self, const2):
        assert rel(weighted_norm(EntireSeries.monomial((4,)), const2, 1), (2 / mp.e) ** 2) < 1e-30

    def test_exp_sup_at_origin(self, const1):
        est = weighted_norm_details(exp_series(1, 200), const1, mp.mpf("1.5"))
        assert est.value == 1 and est.argmax_r == 0 and not est.truncation_flag

    def test_truncation_flag(self, const1):
        est = weighted_norm_details(exp_series(1, 40), const1, mp.mpf("0.9"))
        assert est.truncation_flag

    def test_sigma_guard(self, const1):
        with pytest.raises(DomainError):
            weighted_norm(EntireSeries.constant(1), const1, 0)

    def test_rescaled_order_is_c_sigma(self, const2, loglog):
        f = EntireSeries.univariate([1, -2, Fraction(1, 3), 0, 5])
        for base in (const2, loglog):
            scaled = normalize(ProximateOrder(base.base.family, base.base.rho, base.base.k,
                                              log_scale=1))
            a = weighted_norm(f, scaled, mp.mpf("0.7"))
            b = weighted_norm(f, base, mp.mpf("0.7") * mp.e)
            assert rel(a, b) < 1e-9


class TestTypeEstimate:
    def test_exp2z(self, const1):
        est = estimate_type(exp_series(2, 400), const1)
        assert 1.9 <= est.sigma_hat <= 2.1
        assert rel(est.sigma_hat, SIGMA_HAT_EXP2Z_400) < 1e-30
        assert est.window == (300, 400)

    def test_expz2(self, const2):
        est = estimate_type(exp_of_power_series(2, 400), const2)
        assert 0.95 <= est.sigma_hat <= 1.05
        assert rel(est.sigma_hat, SIGMA_HAT_EXPZ2_400) < 1e-30

    def test_polynomial_with_empty_tail(self, const1):
        f = EntireSeries(1, 100, {(0,): 1, (3,): 2})
        assert estimate_type(f, const1).sigma_hat == 0

    def test_window_guard(self, const1):
        with pytest.raises(PreconditionError):
            estimate_type(exp_series(1, 10), const1, window_frac=0)


class TestMembership:
    def test_expz_sigma1(self, const1, scale1):
        v = classify_minimal_type(exp_series(1, 400), const1, 1, scale1)
        assert v.verdict == MEMBER
        assert 0 < v.margin < 0.02

    def test_exp2z_sigma1(self, const1, scale1):
        assert classify_minimal_type(exp_series(2, 400), const1, 1, scale1).verdict == NOT_MEMBER

    def test_polynomial(self, const1, scale1):
        f = EntireSeries(1, 400, {(0,): 1, (5,): 3})
        assert classify_minimal_type(f, const1, 0, scale1).verdict == MEMBER

    def test_sigma_zero_for_order_half_function(self, const1, scale1):
        f = EntireSeries(1, 400, {(q,): Fraction(1, math.factorial(q) ** 2) for q in range(401)})
        assert classify_minimal_type(f, const1, 0, scale1).verdict == MEMBER
        assert classify_minimal_type(exp_series(1, 400), const1, 0, scale1).verdict == NOT_MEMBER

    def test_scale_guard(self, const1, const2, scale2):
        with pytest.raises(PreconditionError):
            classify_minimal_type(exp_series(1, 10), const1, 1, scale2)
        with pytest.raises(PreconditionError):
            classify_minimal_type(exp_series(1, 500), const2, 1, scale2)

    def test_coeff_bound_matches_minimal_for_n1(self, const1, scale1):
        for c in (1, 2, Fraction(1, 2)):
            f = exp_series(c, 400)
            for s in (Fraction(1, 2), 1, Fraction(3, 2), 3):
                assert (classify_coeff_bound(f, const1, s, scale1).verdict
                        == classify_minimal_type(f, const1, s, scale1).verdict)

    @pytest.mark.parametrize("rho", [1, 2])
    def test_coeff_bound_diagonal_two_variables(self, rho):
        order = normalize(ProximateOrder("constant", rho))
        scale = growth_scale(order, 200)
        f = EntireSeries(2, 200, {(q // 2, q // 2): mp.exp(-scale[q]) for q in range(0, 201, 2)})
        threshold_sigma = mp.mpf(2) ** (-mp.mpf(rho) / 2)
        assert classify_coeff_bound(f, order, threshold_sigma * mp.mpf("1.05"),
                                    scale).verdict == MEMBER
        assert classify_coeff_bound(f, order, threshold_sigma * mp.mpf("0.95"),
                                    scale).verdict == NOT_MEMBER

    def test_coeff_bound_zero_series(self, const1, scale1):
        assert classify_coeff_bound(EntireSeries.zero(1, 10), const1, 0, scale1).verdict == MEMBER

    def test_normal_type(self, const1, scale1):
        v = classify_normal_type(exp_series(5, 400), const1, scale1)
        assert v.verdict == MEMBER and 4.8 < v.fitted["bound"] < 5.0
        big = EntireSeries(1, 400, {(q,): Fraction(math.factorial(q) ** 2) for q in range(401)})
        assert classify_normal_type(big, const1, scale1).verdict == NOT_MEMBER
        poly = EntireSeries(1, 400, {(2,): 7})
        assert classify_normal_type(poly, const1, scale1).verdict == MEMBER

    def test_close_call_is_inconclusive(self, const1, scale1):
        f = exp_series(1, 400)
        ref = classify_minimal_type(f, const1, 1, scale1)
        # a margin below ten trend slopes cannot be told apart from noise
        ln_sigma = mp.log(ref.fitted["limsup_proxy"]) + 2 * ref.fitted["trend_slope"]
        sigma = mp.exp(ln_sigma)
        assert classify_minimal_type(f, const1, sigma, scale1).verdict == INCONCLUSIVE

    def test_verdict_json(self, const1, scale1):
        out = classify_minimal_type(exp_series(1, 100), const1, 1, scale1).to_json()
        json.dumps(out)
        assert set(out) == {"verdict", "fitted", "margin", "diagnostics"}


class TestNormLemmas:
    def test_monomial_norm_constant(self, const1, scale1):
        rep = monomial_norm_check(const1, 1, Fraction(1, 2), scale1, 100)
        assert rep.passed and abs(rep.fitted_constants["C"] - 1) < 1e-9

    def test_monomial_q10(self, const1, scale1):
        ln_norm = ln_monomial_norm(const1, 10, 1)
        assert abs(ln_norm - 10 * (mp.log(10) - 1)) < 1e-30
        assert ln_norm <= mp.log(2) * 10 + scale1[10] + 1e-30

    def test_monomial_guard(self, const1, scale1):
        with pytest.raises(PreconditionError):
            monomial_norm_check(const1, 1, 1, scale1, 10)

    def test_derivative_norm_constant_function(self, const1, scale1):
        rep = derivative_norm_check(EntireSeries.constant(1), const1, 1, Fraction(5, 2), scale1, 10)
        assert rep.passed and rep.fitted_constants["C"] == 1

    def test_derivative_norm_polynomial(self, const1, scale1):
        rep = derivative_norm_check(EntireSeries.monomial((6,)), const1, 1, Fraction(5, 2),
                                    scale1, 20)
        assert rep.passed and mp.isfinite(rep.fitted_constants["C"])


class TestPartialSums:
    def test_geometric_tail_oracle(self, const1):
        r = partial_sum_residual(exp_series(1, 200), const1, 1, Fraction(1, 10), 100)
        assert rel(r, RESIDUAL_EXPZ_100) < 1e-30

    def test_decreasing_in_Q(self, const1):
        f = exp_series(1, 200)
        vals = [partial_sum_residual(f, const1, 1, Fraction(1, 10), Q) for Q in (20, 60, 100, 150)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_empty_tail(self, const1):
        f = exp_series(1, 50)
        assert partial_sum_residual(f, const1, 1, Fraction(1, 10), 50) == 0
        poly = EntireSeries(1, 50, {(3,): 1})
        assert partial_sum_residual(poly, const1, 1, Fraction(1, 10), 3) == 0

    def test_guard(self, const1):
        with pytest.raises(PreconditionError):
            partial_sum_residual(exp_series(1, 5), const1, 1, Fraction(1, 10), 6)


@pytest.mark.parametrize("n,q", [(1, 7), (2, 3), (3, 2), (4, 5)])
def test_multi_choose_by_enumeration(n, q):
    count = sum(1 for a in itertools.product(range(q + 1), repeat=n) if sum(a) == q)
    assert multi_choose(n, q) == count <= (q + 1) ** (n - 1)
