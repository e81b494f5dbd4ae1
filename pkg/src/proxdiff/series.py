"""Truncated multivariate entire series and their growth analysis.

An :class:`EntireSeries` stores Taylor coefficients ``f_alpha`` for
``|alpha| <= q_max``.  Exact (``Fraction`` / :class:`GaussianRational`)
payloads describe polynomials; high-precision payloads describe truncations.

Growth is analysed through the homogeneous-part norms
``K_q = sup_{|z|<=1} |sum_{|alpha|=q} f_alpha z^alpha|``, for which an
interval ``[lower, upper]`` is carried in log form.  limsup quantities are
approximated by a max over a tail window together with a least-squares trend,
so every verdict is a statement about the available truncation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import multiindex as mi
from ._numbers import (
    NEG_INF,
    POS_INF,
    DomainError,
    GaussianRational,
    PreconditionError,
    format_real,
    format_value,
    is_exact,
    log_abs,
    mp,
    parse_value,
    to_mp,
)
from .proxorder import GrowthScale, LemmaReport, NormalizedOrder, ln_phi

DEFAULT_WINDOW_FRAC = 0.25
DEFAULT_RADIAL_GRID = 400
TOP_SHARE_LIMIT = mp.mpf("1e-6")

MEMBER, NOT_MEMBER, INCONCLUSIVE = "Member", "NotMember", "Inconclusive"


class EntireSeries:
    """Coefficient table ``alpha -> f_alpha`` with ``|alpha| <= q_max``.

    Zero coefficients are dropped; equality compares ``n`` and the nonzero
    coefficients only.
    """

    def __init__(self, n: int, q_max: int, coeffs: dict | None = None):
        if n < 1:
            raise DomainError(f"n must be >= 1, got {n}")
        if q_max < 0:
            raise DomainError(f"q_max must be >= 0, got {q_max}")
        self.n = int(n)
        self.q_max = int(q_max)
        clean = {}
        for alpha, v in (coeffs or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n or min(alpha) < 0:
                raise DomainError(f"bad multi-index {alpha} for n={n}")
            if sum(alpha) > q_max:
                raise DomainError(f"multi-index {alpha} exceeds q_max={q_max}")
            if isinstance(v, int):
                v = Fraction(v)
            if v:
                clean[alpha] = v
        self.coeffs = clean
        self._parts = None
        self._profiles = {}

    # -- construction helpers ---------------------------------------------

    @classmethod
    def constant(cls, c, n: int = 1) -> "EntireSeries":
        return cls(n, 0, {mi.zero(n): c})

    @classmethod
    def monomial(cls, alpha, c=1) -> "EntireSeries":
        alpha = tuple(alpha)
        return cls(len(alpha), sum(alpha), {alpha: c})

    @classmethod
    def univariate(cls, coefficients) -> "EntireSeries":
        coefficients = list(coefficients)
        return cls(1, max(len(coefficients) - 1, 0),
                   {(q,): c for q, c in enumerate(coefficients)})

    @classmethod
    def zero(cls, n: int = 1, q_max: int = 0) -> "EntireSeries":
        return cls(n, q_max, {})

    # -- basic properties -----------------------------------------------------

    @property
    def value_kind(self) -> str:
        return "rational" if all(is_exact(v) for v in self.coeffs.values()) else "real"

    @property
    def is_exact(self) -> bool:
        return self.value_kind == "rational"

    def degree(self) -> int:
        return max((sum(a) for a in self.coeffs), default=-1)

    def __getitem__(self, alpha):
        return self.coeffs.get(tuple(alpha), 0)

    def __eq__(self, other):
        if not isinstance(other, EntireSeries):
            return NotImplemented
        return self.n == other.n and self.coeffs == other.coeffs

    def __repr__(self):
        return f"EntireSeries(n={self.n}, q_max={self.q_max}, terms={len(self.coeffs)})"

    def parts(self) -> dict:
        """Homogeneous parts: ``q -> [(alpha, f_alpha), ...]``."""
        if self._parts is None:
            parts: dict = {}
            for alpha, v in self.coeffs.items():
                parts.setdefault(sum(alpha), []).append((alpha, v))
            self._parts = parts
        return self._parts

    # -- algebra ----------------------------------------------------------------

    def _coerced(self, v):
        return v if self.is_exact else to_mp(v)

    def scale(self, c) -> "EntireSeries":
        if not is_exact(c):
            c = to_mp(c)
        return EntireSeries(self.n, self.q_max, {a: c * v for a, v in self.coeffs.items()})

    def __add__(self, other: "EntireSeries") -> "EntireSeries":
        self._check_n(other)
        out = dict(self.coeffs)
        for a, v in other.coeffs.items():
            out[a] = out[a] + v if a in out else v
        return EntireSeries(self.n, max(self.q_max, other.q_max), out)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "EntireSeries") -> "EntireSeries":
        if not isinstance(other, EntireSeries):
            return self.scale(other)
        self._check_n(other)
        out: dict = {}
        for a, v in self.coeffs.items():
            for b, w in other.coeffs.items():
                key = mi.add(a, b)
                out[key] = out[key] + v * w if key in out else v * w
        return EntireSeries(self.n, self.q_max + other.q_max, out)

    __rmul__ = scale

    def shift_by_monomial(self, gamma, c=1) -> "EntireSeries":
        """``c * z^gamma * self``."""
        gamma = tuple(gamma)
        return EntireSeries(self.n, self.q_max + sum(gamma),
                            {mi.add(a, gamma): c * v for a, v in self.coeffs.items()})

    def derivative(self, alpha) -> "EntireSeries":
        """``d^alpha f``; the coefficient of z^gamma is f_{gamma+alpha} (gamma+alpha)!/gamma!."""
        alpha = tuple(alpha)
        out = {}
        for beta, v in self.coeffs.items():
            if mi.leq(alpha, beta):
                gamma = mi.sub(beta, alpha)
                out[gamma] = v * (mi.factorial(beta) // mi.factorial(gamma))
        return EntireSeries(self.n, max(self.q_max - sum(alpha), 0), out)

    def truncate(self, q: int) -> "EntireSeries":
        return EntireSeries(self.n, min(q, self.q_max),
                            {a: v for a, v in self.coeffs.items() if sum(a) <= q})

    def to_real(self) -> "EntireSeries":
        return EntireSeries(self.n, self.q_max, {a: to_mp(v) for a, v in self.coeffs.items()})

    def _check_n(self, other):
        if self.n != other.n:
            raise DomainError(f"variable counts differ: {self.n} vs {other.n}")

    # -- JSON -----------------------------------------------------------------

    def to_json(self) -> dict:
        items = sorted(self.coeffs.items(), key=lambda kv: (sum(kv[0]), tuple(-a for a in kv[0])))
        return {"n": self.n, "q_max": self.q_max,
                "coefficients": [{"alpha": list(a), "value": format_value(v)} for a, v in items]}

    @classmethod
    def from_json(cls, obj) -> "EntireSeries":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            n, q_max = int(obj["n"]), int(obj["q_max"])
            coeffs = {}
            for i, entry in enumerate(obj.get("coefficients", [])):
                alpha = tuple(int(a) for a in entry["alpha"])
                if alpha in coeffs:
                    raise DomainError(f"duplicate multi-index {alpha} at coefficients[{i}]")
                coeffs[alpha] = parse_value(entry["value"])
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed series JSON: {exc}") from exc
        return cls(n, q_max, coeffs)


def exp_series(c, q_max: int) -> EntireSeries:
    """Truncation of e^{c z} (one variable); exact when ``c`` is rational."""
    exact = is_exact(c)
    c = Fraction(c) if isinstance(c, int) else (c if exact else to_mp(c))
    coeffs, term = {}, (Fraction(1) if exact else mp.one)
    for q in range(q_max + 1):
        coeffs[(q,)] = term
        term = term * c / (q + 1)
    return EntireSeries(1, q_max, coeffs)


def exp_of_power_series(m: int, q_max: int) -> EntireSeries:
    """Truncation of e^{z^m}: coefficient 1/j! at q = m j."""
    return EntireSeries(1, q_max, {(m * j,): Fraction(1, math.factorial(j))
                                   for j in range(q_max // m + 1)})


# ---------------------------------------------------------------------------
# homogeneous-part norms


@dataclass(frozen=True)
class HomNormProfile:
    q_max: int
    ln_K_lower: tuple
    ln_K_upper: tuple


def _ln_sum_abs(terms):
    logs = [log_abs(v) for _, v in terms]
    return mp_logsumexp(logs)


def mp_logsumexp(logs):
    logs = [x for x in logs if x != NEG_INF]
    if not logs:
        return NEG_INF
    m = max(logs)
    cutoff = -(mp.prec + 20)
    return m + mp.log(mp.fsum(mp.exp(x - m) for x in logs if x - m > cutoff))


def _sampled_lower(terms, n, samples, rng):
    """ln max_z |P(z)| over random unit-sphere points with phase alignment."""
    logs = np.array([float(log_abs(v)) for _, v in terms])
    top = logs.max()
    coeffs = np.array([complex(to_mp(v) / mp.exp(mp.mpf(top))) if logs[i] - top > -700 else 0j
                       for i, (_, v) in enumerate(terms)])
    expo = np.array([a for a, _ in terms], dtype=float)
    q = expo[0].sum()

    g = rng.normal(size=(samples, n)) + 1j * rng.normal(size=(samples, n))
    pts = g / np.linalg.norm(g, axis=1, keepdims=True)
    special = [np.full(n, 1 / math.sqrt(n), dtype=complex)]
    lead = expo[int(np.argmax(logs))]
    special.append(np.sqrt(lead / q).astype(complex))
    pts = np.vstack([pts] + special)

    with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
        mod = np.abs(pts)
        log_mod = np.where(mod > 0, np.log(mod), -np.inf)
        ang = np.angle(pts)
        phases = np.linspace(0, 2 * np.pi, 16, endpoint=False)

        def monomials(lm, an):
            lm_terms = np.where(expo[None, :, :] > 0, expo[None, :, :] * lm[:, None, :], 0.0)
            return np.exp(lm_terms.sum(axis=2) + 1j * (expo[None, :, :] * an[:, None, :]).sum(axis=2))

        for _ in range(2):
            for i in range(n):
                base = monomials(log_mod, ang) * coeffs[None, :]
                rot = np.exp(1j * np.outer(expo[:, i], phases))
                vals = np.abs(base @ rot)
                ang[:, i] += phases[np.argmax(vals, axis=1)]
        best = np.abs(monomials(log_mod, ang) @ coeffs).max()
    if not best > 0:
        return NEG_INF
    # shave off more than the float64 evaluation error so the bound stays below the truth
    return mp.mpf(top) + mp.log(mp.mpf(best)) + mp.log1p(-mp.mpf(len(terms)) * mp.mpf(2) ** -40)


def hom_norm_profile(f: EntireSeries, samples: int = 64, seed: int = 0) -> HomNormProfile:
    """Bounds on ln K_q for q = 0..q_max."""
    if samples < 1:
        raise PreconditionError(f"samples must be >= 1, got {samples}")
    key = (samples, seed, mp.prec)
    if key in f._profiles:
        return f._profiles[key]
    parts = f.parts()
    rng = np.random.default_rng(seed)
    lower, upper = [], []
    for q in range(f.q_max + 1):
        terms = parts.get(q)
        if not terms:
            lower.append(NEG_INF)
            upper.append(NEG_INF)
            continue
        up = _ln_sum_abs(terms)
        if f.n == 1:
            lower.append(up)
            upper.append(up)
            continue
        floor = max(log_abs(v) + mi.ln_sphere_sup(a) for a, v in terms)
        low = max(floor, _sampled_lower(terms, f.n, samples, rng)) if len(terms) > 1 else floor
        lower.append(min(low, up))
        upper.append(up)
    profile = HomNormProfile(f.q_max, tuple(lower), tuple(upper))
    f._profiles[key] = profile
    return profile


def ln_max_coeff(f: EntireSeries) -> list:
    """ln max_{|alpha|=q} |f_alpha| for q = 0..q_max."""
    parts = f.parts()
    return [max((log_abs(v) for _, v in parts[q]), default=NEG_INF) if q in parts else NEG_INF
            for q in range(f.q_max + 1)]


# ---------------------------------------------------------------------------
# weighted sup norms


@dataclass(frozen=True)
class NormEstimate:
    value: object
    ln_value: object
    argmax_r: object
    r_reliable: object
    truncation_flag: bool


def _ln_sup(ln_terms, order: NormalizedOrder, sigma, radial_grid: int = DEFAULT_RADIAL_GRID):
    """sup_{r >= 0} ln(sum_q U_q r^q) - sigma r^rho_hat(r); returns (value, ln r at argmax).

    ``ln_terms`` is a list of ``(q, ln U_q)`` with finite logs.  ``-inf`` as
    the argmax means the supremum is the r -> 0 limit.
    """
    if not ln_terms:
        return NEG_INF, NEG_INF
    positive = [(q, a) for q, a in ln_terms if q > 0]
    at_zero = next((a for q, a in ln_terms if q == 0), NEG_INF)
    if not positive:
        return at_zero, NEG_INF
    rho = order.rho
    q_lo = min(q for q, _ in positive)
    q_hi = max(q for q, _ in positive)
    u_lo = ln_phi(order, mp.log(mp.mpf(q_lo) / (sigma * rho) / 100)) - 1
    u_hi = ln_phi(order, mp.log(4 * mp.mpf(q_hi) / (sigma * rho))) + 1

    qs = np.array([q for q, _ in ln_terms], dtype=float)
    As = np.array([float(a) for _, a in ln_terms])
    us = [u_lo + (u_hi - u_lo) * i / (radial_grid - 1) for i in range(radial_grid)]
    lnw = np.array([float(order.lnw_u(u)) for u in us])
    uf = np.array([float(u) for u in us])
    with np.errstate(over="ignore"):
        E = As[None, :] + qs[None, :] * uf[:, None]
        m = E.max(axis=1)
        g = m + np.log(np.exp(E - m[:, None]).sum(axis=1)) - float(sigma) * np.exp(lnw)
    i = int(np.nanargmax(g))

    def G(u):
        lse = mp_logsumexp([a + q * u for q, a in ln_terms])
        return lse - sigma * mp.exp(order.lnw_u(u))

    inv_phi = (mp.sqrt(5) - 1) / 2
    a, b = us[max(i - 1, 0)], us[min(i + 1, radial_grid - 1)]
    x1, x2 = b - inv_phi * (b - a), a + inv_phi * (b - a)
    f1, f2 = G(x1), G(x2)
    for _ in range(90):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv_phi * (b - a)
            f2 = G(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv_phi * (b - a)
            f1 = G(x1)
    u_best, best = (x1, f1) if f1 >= f2 else (x2, f2)
    for u in (us[max(i - 1, 0)], us[i], us[min(i + 1, radial_grid - 1)]):
        val = G(u)
        if val > best:
            u_best, best = u, val
    if at_zero >= best:
        return at_zero, NEG_INF
    return best, u_best


def _top_share(ln_terms, u):
    """Fraction of the majorant at r = e^u carried by the highest-degree term."""
    q_top, a_top = max(ln_terms)
    return mp.exp(a_top + q_top * u - mp_logsumexp([a + q * u for q, a in ln_terms]))


def weighted_norm_details(f: EntireSeries, order: NormalizedOrder, sigma,
                          radial_grid: int = DEFAULT_RADIAL_GRID, samples: int = 64) -> NormEstimate:
    """Upper estimate of sup_z |f(z)| exp(-sigma |z|^rho_hat(|z|)).

    |f(z)| is bounded by sum_q U_q r^q with U_q the triangle bound on the
    degree-q part; the radial sup of that majorant is located on a log grid
    and refined by golden-section search.

    ``truncation_flag`` is raised when the argmax comes within 1% of
    ``phi(q_max/(sigma rho))``, or, when the series reaches degree q_max,
    the top-degree term still carries more than ``TOP_SHARE_LIMIT`` of the
    majorant at the argmax.
    """
    sigma = to_mp(sigma)
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    prof = hom_norm_profile(f, samples=samples)
    ln_terms = [(q, a) for q, a in enumerate(prof.ln_K_upper) if a != NEG_INF]
    ln_value, u_arg = _ln_sup(ln_terms, order, sigma, radial_grid)
    r_rel = mp.exp(ln_phi(order, mp.log(mp.mpf(max(f.q_max, 1)) / (sigma * order.rho))))
    arg_r = mp.zero if u_arg == NEG_INF else mp.exp(u_arg)
    value = mp.zero if ln_value == NEG_INF else mp.exp(ln_value)
    flag = arg_r >= r_rel * mp.mpf("0.99")
    if not flag and u_arg != NEG_INF and f.degree() == f.q_max:
        flag = _top_share(ln_terms, u_arg) > TOP_SHARE_LIMIT
    return NormEstimate(value, ln_value, arg_r, r_rel, bool(flag))


def weighted_norm(f: EntireSeries, order: NormalizedOrder, sigma,
                  radial_grid: int = DEFAULT_RADIAL_GRID):
    """Upper estimate of the weighted sup norm ||f||_{rho_hat, sigma}."""
    return weighted_norm_details(f, order, sigma, radial_grid).value


def ln_monomial_norm(order: NormalizedOrder, q: int, sigma, radial_grid: int = DEFAULT_RADIAL_GRID):
    """ln ||z^q||_{rho_hat, sigma} in one variable (exact radial sup)."""
    return _ln_sup([(q, mp.zero)], order, to_mp(sigma), radial_grid)[0]


# ---------------------------------------------------------------------------
# tail statistics


@dataclass(frozen=True)
class _Tail:
    qs: tuple
    values: tuple
    max: object
    argmax: int
    slope: float
    slope_ln: float


def _tail(values_by_q: dict):
    if not values_by_q:
        return None
    qs = sorted(values_by_q)
    vals = [values_by_q[q] for q in qs]
    m = max(vals)
    arg = qs[vals.index(m)]
    if len(qs) >= 2:
        x = np.array(qs, dtype=float)
        y = np.array([float(v) for v in vals])
        slope = float(np.polyfit(x, y, 1)[0])
        slope_ln = float(np.polyfit(np.log(x), y, 1)[0]) if x.min() > 0 else slope
    else:
        slope = slope_ln = 0.0
    return _Tail(tuple(qs), tuple(vals), m, arg, slope, slope_ln)


def _window(q_max: int, window_frac: float):
    if not 0 < window_frac <= 1:
        raise PreconditionError(f"window_frac must lie in (0, 1], got {window_frac}")
    q_lo = max(math.ceil((1 - window_frac) * q_max), 1)
    return q_lo, q_max


# ---------------------------------------------------------------------------
# type estimation and membership


@dataclass(frozen=True)
class TypeEstimate:
    sigma_hat: object
    window: tuple
    trend_slope: float
    confidence_note: str

    def to_json(self) -> dict:
        return {"sigma_hat": format_real(self.sigma_hat), "window": list(self.window),
                "trend_slope": repr(self.trend_slope), "confidence_note": self.confidence_note}


def estimate_type(f: EntireSeries, order: NormalizedOrder,
                  window_frac: float = DEFAULT_WINDOW_FRAC) -> TypeEstimate:
    """Estimate the type of f from s_q = (1/q) ln K_q + ln phi(q) over a tail window."""
    q_lo, q_hi = _window(f.q_max, window_frac)
    prof = hom_norm_profile(f)
    s = {q: prof.ln_K_upper[q] / q + ln_phi(order, mp.log(q))
         for q in range(q_lo, q_hi + 1) if prof.ln_K_upper[q] != NEG_INF}
    tail = _tail(s)
    if tail is None:
        return TypeEstimate(mp.zero, (q_lo, q_hi), 0.0,
                            "no nonzero homogeneous part in the tail window; treated as type 0")
    rho = order.rho
    sigma_hat = mp.exp(rho * (tail.max - 1 / rho - mp.log(rho) / rho))
    note = (f"tail max at q={tail.argmax} over {len(tail.qs)} nonzero parts; "
            + ("s_q still rising, estimate is a lower proxy" if tail.slope > 0
               else "s_q flat or falling over the window"))
    return TypeEstimate(sigma_hat, (q_lo, q_hi), tail.slope, note)


@dataclass
class MembershipVerdict:
    verdict: str
    fitted: dict
    margin: object
    diagnostics: str

    def to_json(self) -> dict:
        return {"verdict": self.verdict,
                "fitted": {k: (format_real(to_mp(v)) if not isinstance(v, (int, str)) else v)
                           for k, v in self.fitted.items()},
                "margin": format_real(to_mp(self.margin)),
                "diagnostics": self.diagnostics}


def _check_scale(f: EntireSeries, order: NormalizedOrder, scale: GrowthScale):
    if scale.order != order:
        raise PreconditionError("growth scale was built on a different order")
    if scale.q_max < f.q_max:
        raise PreconditionError(f"growth scale q_max={scale.q_max} < series q_max={f.q_max}")


def _limsup_test(v: dict, ln_threshold, what: str) -> MembershipVerdict:
    """Decide limsup v_q <= ln_threshold from a tail window of values."""
    tail = _tail(v)
    if tail is None:
        return MembershipVerdict(MEMBER, {"limsup_proxy": mp.zero}, POS_INF,
                                 f"{what}: tail window is empty (polynomial); limsup is -inf")
    fitted = {"limsup_proxy": mp.exp(tail.max), "argmax_q": tail.argmax,
              "trend_slope": tail.slope}
    if ln_threshold == NEG_INF:
        # threshold 0: need v_q -> -inf, read off the trend against ln q
        margin = -tail.slope_ln
        fitted["trend_slope_ln_q"] = tail.slope_ln
        if tail.slope_ln <= -0.25:
            verdict = MEMBER
        elif tail.slope_ln >= -0.05:
            verdict = NOT_MEMBER
        else:
            verdict = INCONCLUSIVE
        return MembershipVerdict(verdict, fitted, margin,
                                 f"{what}: threshold 0, slope of the tail against ln q is "
                                 f"{tail.slope_ln:.4g}")
    margin = ln_threshold - tail.max
    if abs(margin) < 10 * abs(tail.slope):
        verdict = INCONCLUSIVE
    else:
        verdict = MEMBER if margin >= 0 else NOT_MEMBER
    return MembershipVerdict(verdict, fitted, margin,
                             f"{what}: tail max {mp.nstr(tail.max, 8)} at q={tail.argmax} vs "
                             f"ln threshold {mp.nstr(ln_threshold, 8)}; trend slope {tail.slope:.3g}")


def classify_minimal_type(f: EntireSeries, order: NormalizedOrder, sigma, scale: GrowthScale,
                          window_frac: float = DEFAULT_WINDOW_FRAC) -> MembershipVerdict:
    """Is f in A_{rho, sigma+0}, i.e. limsup (K_q G_q)^{rho/q} <= sigma?"""
    _check_scale(f, order, scale)
    sigma = to_mp(sigma)
    if sigma < 0:
        raise DomainError("sigma must be nonnegative")
    rho = order.rho
    q_lo, q_hi = _window(f.q_max, window_frac)
    prof = hom_norm_profile(f)
    v = {q: rho / q * (prof.ln_K_upper[q] + scale[q])
         for q in range(q_lo, q_hi + 1) if prof.ln_K_upper[q] != NEG_INF}
    ln_thr = mp.log(sigma) if sigma > 0 else NEG_INF
    out = _limsup_test(v, ln_thr, "(K_q G_q)^(rho/q)")
    out.fitted["sigma"] = sigma
    return out


def classify_coeff_bound(f: EntireSeries, order: NormalizedOrder, sigma, scale: GrowthScale,
                         window_frac: float = DEFAULT_WINDOW_FRAC) -> MembershipVerdict:
    """Coefficient test limsup (max|f_alpha| G_q)^{rho/q} <= sqrt(n)^rho sigma.

    Member implies f in A_{rho, sqrt(n)^rho sigma + 0}; NotMember implies f is
    not in A_{rho, sigma+0}.
    """
    _check_scale(f, order, scale)
    sigma = to_mp(sigma)
    if sigma < 0:
        raise DomainError("sigma must be nonnegative")
    rho = order.rho
    q_lo, q_hi = _window(f.q_max, window_frac)
    lmc = ln_max_coeff(f)
    v = {q: rho / q * (lmc[q] + scale[q]) for q in range(q_lo, q_hi + 1) if lmc[q] != NEG_INF}
    threshold = mp.power(f.n, rho / 2) * sigma
    out = _limsup_test(v, mp.log(threshold) if sigma > 0 else NEG_INF,
                       "(max|f_alpha| G_q)^(rho/q)")
    out.fitted["threshold"] = threshold
    out.fitted["implied_type"] = threshold
    if out.verdict == MEMBER:
        out.diagnostics += f"; implies f in A_(rho, {mp.nstr(threshold, 8)}+0)"
    elif out.verdict == NOT_MEMBER:
        out.diagnostics += f"; implies f not in A_(rho, {mp.nstr(sigma, 8)}+0)"
    return out


def classify_normal_type(f: EntireSeries, order: NormalizedOrder, scale: GrowthScale,
                         window_frac: float = DEFAULT_WINDOW_FRAC) -> MembershipVerdict:
    """Is f in A_rho, i.e. limsup (max|f_alpha| G_q)^{rho/q} < infinity?"""
    _check_scale(f, order, scale)
    rho = order.rho
    q_lo, q_hi = _window(f.q_max, window_frac)
    lmc = ln_max_coeff(f)
    v = {q: rho / q * (lmc[q] + scale[q]) for q in range(q_lo, q_hi + 1) if lmc[q] != NEG_INF}
    tail = _tail(v)
    if tail is None:
        return MembershipVerdict(MEMBER, {"bound": mp.zero}, POS_INF,
                                 "tail window is empty (polynomial)")
    # bounded sequences have vanishing slope against ln q; divergent ones grow like c ln q
    margin = 0.1 - tail.slope_ln
    if tail.slope_ln <= 0.1:
        verdict = MEMBER
    elif tail.slope_ln >= 0.3:
        verdict = NOT_MEMBER
    else:
        verdict = INCONCLUSIVE
    return MembershipVerdict(verdict,
                             {"bound": mp.exp(tail.max), "argmax_q": tail.argmax,
                              "trend_slope_ln_q": tail.slope_ln},
                             margin,
                             f"tail max {mp.nstr(mp.exp(tail.max), 8)} at q={tail.argmax}; "
                             f"slope against ln q {tail.slope_ln:.4g}")


# ---------------------------------------------------------------------------
# norm lemmas


def monomial_norm_check(order: NormalizedOrder, sigma, sigma_prime, scale: GrowthScale,
                        q_max: int, radial_grid: int = DEFAULT_RADIAL_GRID) -> LemmaReport:
    """Fit C in ||z^q||_sigma <= C sigma'^(-q/rho) G_q and re-check on held-out q.

    Every fourth degree (q = 3 mod 4) is held out of the fit.
    """
    sigma, sigma_prime = to_mp(sigma), to_mp(sigma_prime)
    if not 0 < sigma_prime < sigma:
        raise PreconditionError("need 0 < sigma_prime < sigma")
    if scale.order != order or scale.q_max < q_max:
        raise PreconditionError("growth scale must be built on the same order with q_max >= q_max")
    rho = order.rho
    ratios = {q: ln_monomial_norm(order, q, sigma, radial_grid) + q / rho * mp.log(sigma_prime)
              - scale[q] for q in range(q_max + 1)}
    fit = [r for q, r in ratios.items() if q % 4 != 3]
    ln_C = max(mp.zero, max(fit))
    held = [r - ln_C for q, r in ratios.items() if q % 4 == 3]
    worst = max(held) if held else mp.ninf
    return LemmaReport("monomial-norm", {"C": mp.exp(ln_C), "sigma": sigma,
                                         "sigma_prime": sigma_prime},
                       f"q = 0..{q_max}, fit on q != 3 mod 4, held-out q = 3 mod 4",
                       worst, bool(mp.isfinite(ln_C) and worst <= 0))


def derivative_norm_check(f: EntireSeries, order: NormalizedOrder, sigma, kappa,
                          scale: GrowthScale, q_max: int,
                          radial_grid: int = 200, window_frac: float = DEFAULT_WINDOW_FRAC
                          ) -> LemmaReport:
    """Fit C(sigma) in ||d^alpha f||_{kappa sigma}/alpha! <= C ||f||_sigma (2 kappa n^{rho/2} sigma)^{q/rho}/G_q.

    Passes when the per-degree constants C_q show no growth over the tail.
    """
    sigma, kappa = to_mp(sigma), to_mp(kappa)
    if not sigma > 0 or not kappa > 0:
        raise PreconditionError("sigma and kappa must be positive")
    if scale.order != order or scale.q_max < q_max:
        raise PreconditionError("growth scale must be built on the same order with q_max >= q_max")
    rho, n = order.rho, f.n
    ln_f = weighted_norm_details(f, order, sigma, radial_grid).ln_value
    if ln_f == NEG_INF:
        return LemmaReport("derivative-norm", {"C": mp.zero}, "f = 0", mp.zero, True)
    ln_base = mp.log(2 * kappa * mp.power(n, rho / 2) * sigma) / rho
    per_q: dict = {}
    for q in range(min(q_max, f.degree()) + 1):
        for alpha in mi.of_weight(n, q):
            g = f.derivative(alpha)
            if not g.coeffs:
                continue
            ln_g = weighted_norm_details(g, order, kappa * sigma, radial_grid).ln_value
            val = ln_g - mi.ln_factorial(alpha) + scale[q] - q * ln_base - ln_f
            per_q[q] = max(per_q.get(q, NEG_INF), val)
    ln_C = max(per_q.values())
    q_lo = math.ceil((1 - window_frac) * q_max)
    tail = _tail({q: v for q, v in per_q.items() if q >= q_lo})
    # no surviving derivative in the window means no growth at all
    slope = tail.slope if tail is not None else -math.inf
    return LemmaReport("derivative-norm",
                       {"C": mp.exp(ln_C), "argmax_q": max(per_q, key=per_q.get),
                        "tail_slope": slope, "kappa": kappa, "sigma": sigma},
                       f"|alpha| <= {q_max}, tail window q >= {q_lo}",
                       slope, bool(mp.isfinite(ln_C) and slope <= 0))


def partial_sum_residual(f: EntireSeries, order: NormalizedOrder, sigma, epsilon, Q: int,
                         radial_grid: int = DEFAULT_RADIAL_GRID):
    """sum_{|alpha| > Q} |f_alpha| ||z^alpha||_{rho, sqrt(n)^rho (sigma+epsilon)}."""
    sigma, epsilon = to_mp(sigma), to_mp(epsilon)
    if not 0 < Q <= f.q_max:
        raise PreconditionError(f"need 0 < Q <= q_max={f.q_max}, got {Q}")
    if not epsilon > 0:
        raise PreconditionError("epsilon must be positive")
    weight = mp.power(f.n, order.rho / 2) * (sigma + epsilon)
    mono: dict = {}
    logs = []
    for alpha, v in f.coeffs.items():
        q = sum(alpha)
        if q <= Q:
            continue
        if q not in mono:
            mono[q] = ln_monomial_norm(order, q, weight, radial_grid)
        logs.append(log_abs(v) + mi.ln_sphere_sup(alpha) + mono[q])
    if not logs:
        return mp.zero
    return mp.exp(mp_logsumexp(logs))


multi_choose = mi.multi_choose
