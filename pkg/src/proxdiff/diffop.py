"""Infinite-order differential operators P = sum_alpha a_alpha(z) d^alpha.

A linear map F on entire functions is determined by its values on monomials,
``b_beta = F(z^beta) / beta!``, and the triangular relations

    b_beta  = sum_{alpha <= beta} a_alpha(z) z^(beta-alpha) / (beta-alpha)!
    a_alpha = sum_{beta <= alpha} b_beta (-z)^(alpha-beta) / (alpha-beta)!

move between the image table and the operator symbol.  Growth classes of
symbols are probed numerically on finite ladders of lambda / sigma values.
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
    is_exact,
    log_abs,
    mp,
    to_mp,
)
from .proxorder import (
    GrowthScale,
    NormalizedOrder,
    ProximateOrder,
    growth_scale,
    ln_phi,
)
from .series import (
    INCONCLUSIVE,
    MEMBER,
    NOT_MEMBER,
    EntireSeries,
    _tail,
    mp_logsumexp,
    weighted_norm_details,
)

NORMAL_TYPE, MINIMAL_TYPE = "NormalType", "MinimalType"
DEFAULT_LADDER = tuple(Fraction(2) ** k for k in range(-6, 7))
WITNESS_THRESHOLD = mp.mpf(10) ** 8


def _monomial(alpha, c):
    return EntireSeries.monomial(alpha, c)


class OperatorSymbol:
    """Coefficients ``alpha -> a_alpha(z)`` for ``|alpha| <= a_max``.

    ``complete=True`` asserts that a_alpha vanishes for ``|alpha| > a_max``
    (a finite-order operator); otherwise the table is a truncation and
    :func:`apply_operator` estimates what the cut leaves out.
    """

    def __init__(self, n: int, a_max: int, table: dict | None = None, complete: bool = False):
        if n < 1 or a_max < 0:
            raise DomainError(f"need n >= 1 and a_max >= 0, got n={n}, a_max={a_max}")
        self.n, self.a_max, self.complete = int(n), int(a_max), bool(complete)
        clean = {}
        for alpha, series in (table or {}).items():
            alpha = tuple(alpha)
            if len(alpha) != n or sum(alpha) > a_max:
                raise DomainError(f"multi-index {alpha} does not fit n={n}, a_max={a_max}")
            if series.n != n:
                raise DomainError(f"coefficient at {alpha} has n={series.n}, expected {n}")
            if series.coeffs:
                clean[alpha] = series
        self.table = clean

    def __getitem__(self, alpha):
        alpha = tuple(alpha)
        return self.table.get(alpha) or EntireSeries.zero(self.n)

    def __eq__(self, other):
        if not isinstance(other, OperatorSymbol):
            return NotImplemented
        return self.n == other.n and self.table == other.table

    def __repr__(self):
        return f"OperatorSymbol(n={self.n}, a_max={self.a_max}, entries={len(self.table)})"

    @property
    def is_exact(self) -> bool:
        return all(s.is_exact for s in self.table.values())

    def to_json(self) -> dict:
        entries = [{"alpha": list(a), "series": self.table[a].to_json()}
                   for a in mi.up_to_weight(self.n, self.a_max) if a in self.table]
        out = {"n": self.n, "a_max": self.a_max, "entries": entries}
        if self.complete:
            out["complete"] = True
        return out

    @classmethod
    def from_json(cls, obj) -> "OperatorSymbol":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            table = {}
            for i, entry in enumerate(obj["entries"]):
                alpha = tuple(int(a) for a in entry["alpha"])
                if alpha in table:
                    raise DomainError(f"duplicate alpha {list(alpha)} at entries[{i}]")
                table[alpha] = EntireSeries.from_json(entry["series"])
            return cls(int(obj["n"]), int(obj["a_max"]), table, bool(obj.get("complete", False)))
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed symbol JSON: {exc}") from exc


class HomImageTable:
    """Monomial images ``beta -> F(z^beta) / beta!`` for ``|beta| <= b_max``."""

    def __init__(self, n: int, b_max: int, images: dict | None = None):
        if n < 1 or b_max < 0:
            raise DomainError(f"need n >= 1 and b_max >= 0, got n={n}, b_max={b_max}")
        self.n, self.b_max = int(n), int(b_max)
        self.images = {}
        for beta, series in (images or {}).items():
            beta = tuple(beta)
            if len(beta) != n or sum(beta) > b_max:
                raise DomainError(f"multi-index {beta} does not fit n={n}, b_max={b_max}")
            if series.n != n:
                raise DomainError(f"image at {beta} has n={series.n}, expected {n}")
            self.images[beta] = series

    def missing(self) -> list:
        return [b for b in mi.up_to_weight(self.n, self.b_max) if b not in self.images]

    def __eq__(self, other):
        if not isinstance(other, HomImageTable):
            return NotImplemented
        keys = set(self.images) | set(other.images)
        zero = EntireSeries.zero(self.n)
        return self.n == other.n and all(self.images.get(k, zero) == other.images.get(k, zero)
                                         for k in keys)

    @classmethod
    def from_map(cls, n: int, b_max: int, F) -> "HomImageTable":
        """Tabulate ``F(z^beta) / beta!`` from a callable on monomial series."""
        images = {}
        for beta in mi.up_to_weight(n, b_max):
            images[beta] = F(_monomial(beta, 1)).scale(Fraction(1, mi.factorial(beta)))
        return cls(n, b_max, images)

    def to_json(self) -> dict:
        return {"n": self.n, "b_max": self.b_max,
                "entries": [{"beta": list(b), "series": self.images[b].to_json()}
                            for b in mi.up_to_weight(self.n, self.b_max) if b in self.images]}

    @classmethod
    def from_json(cls, obj) -> "HomImageTable":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            images = {}
            for i, entry in enumerate(obj["entries"]):
                beta = tuple(int(b) for b in entry["beta"])
                if beta in images:
                    raise DomainError(f"duplicate beta {list(beta)} at entries[{i}]")
                images[beta] = EntireSeries.from_json(entry["series"])
            return cls(int(obj["n"]), int(obj["b_max"]), images)
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed image table JSON: {exc}") from exc


# ---------------------------------------------------------------------------
# symbol <-> homomorphism


def _sum_series(n, terms):
    out = EntireSeries.zero(n)
    for s in terms:
        out = out + s
    return out


def hom_to_symbol(images: HomImageTable) -> OperatorSymbol:
    """a_alpha = sum_{beta <= alpha} b_beta (-z)^(alpha-beta) / (alpha-beta)!."""
    missing = images.missing()
    if missing:
        raise PreconditionError("image table is incomplete; missing beta: "
                                + ", ".join(str(list(b)) for b in missing))
    n, table = images.n, {}
    for alpha in mi.up_to_weight(n, images.b_max):
        terms = []
        for beta in mi.below(alpha):
            gamma = mi.sub(alpha, beta)
            c = Fraction((-1) ** sum(gamma), mi.factorial(gamma))
            terms.append(images.images[beta].shift_by_monomial(gamma, c))
        table[alpha] = _sum_series(n, terms)
    return OperatorSymbol(n, images.b_max, table)


def symbol_to_hom(symbol: OperatorSymbol) -> HomImageTable:
    """b_beta = sum_{alpha <= beta} a_alpha z^(beta-alpha) / (beta-alpha)! = P(z^beta) / beta!."""
    n, images = symbol.n, {}
    for beta in mi.up_to_weight(n, symbol.a_max):
        terms = []
        for alpha in mi.below(beta):
            if alpha in symbol.table:
                gamma = mi.sub(beta, alpha)
                terms.append(symbol.table[alpha].shift_by_monomial(
                    gamma, Fraction(1, mi.factorial(gamma))))
        images[beta] = _sum_series(n, terms)
    return HomImageTable(n, symbol.a_max, images)


# ---------------------------------------------------------------------------
# standard symbols


def identity_symbol(n: int = 1) -> OperatorSymbol:
    return OperatorSymbol(n, 0, {mi.zero(n): EntireSeries.constant(1, n)}, complete=True)


def shift_symbol(c, a_max: int) -> OperatorSymbol:
    """Truncation of e^{c d/dz} (one variable): a_j = c^j / j!."""
    exact = is_exact(c)
    c = Fraction(c) if isinstance(c, int) else (c if exact else to_mp(c))
    table, term = {}, (Fraction(1) if exact else mp.one)
    for j in range(a_max + 1):
        table[(j,)] = EntireSeries.constant(term)
        term = term * c / (j + 1)
    return OperatorSymbol(1, a_max, table)


def schrodinger_symbol(t, j_max: int, drift: bool = False, prefactor: bool = False,
                       prefactor_q_max: int = 64) -> OperatorSymbol:
    """Symbol of exp(i t/2 d^2) = sum_j (i t/2)^j / j! d^(2j), truncated at j_max.

    ``drift`` multiplies by exp(t^2/2 d); ``prefactor`` multiplies every
    coefficient by exp(-i(t z + t^3/6)) (a truncated entire series).
    """
    if j_max < 1:
        raise PreconditionError(f"j_max must be >= 1, got {j_max}")
    exact = is_exact(t)
    if exact:
        t = Fraction(t) if not isinstance(t, GaussianRational) else t
        half_it = GaussianRational(0, 1) * t / 2
        one = Fraction(1)
    else:
        t = to_mp(t)
        half_it = mp.mpc(0, 1) * t / 2
        one = mp.one
    a_max = 2 * j_max
    coeffs, term = {}, one
    for j in range(j_max + 1):
        coeffs[2 * j] = term
        term = term * half_it / (j + 1)
    if drift:
        d, dterm = {}, one
        for m in range(a_max + 1):
            d[m] = dterm
            dterm = dterm * (t * t / 2) / (m + 1)
        conv = {}
        for p, cp in coeffs.items():
            for m, dm in d.items():
                if p + m <= a_max:
                    conv[p + m] = conv[p + m] + cp * dm if p + m in conv else cp * dm
        coeffs = conv
    if prefactor:
        tt = to_mp(t)
        lead = mp.exp(-mp.mpc(0, 1) * tt ** 3 / 6)
        pre, c = {}, lead
        for q in range(prefactor_q_max + 1):
            pre[(q,)] = c
            c = c * (-mp.mpc(0, 1) * tt) / (q + 1)
        base = EntireSeries(1, prefactor_q_max, pre)
        table = {(m,): base.scale(v) for m, v in coeffs.items() if v}
    else:
        table = {(m,): EntireSeries.constant(v) for m, v in coeffs.items() if v}
    return OperatorSymbol(1, a_max, table, complete=False)


def rescale_dst_order(order: ProximateOrder, c) -> ProximateOrder:
    """Add ln c / ln r to the order, multiplying its weight by c for large r."""
    c = to_mp(c)
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    return ProximateOrder(order.family, order.rho, order.k, order.r_cut,
                          to_mp(order.log_scale) + mp.log(c))


# ---------------------------------------------------------------------------
# application


def _split_high(s: EntireSeries, q_out: int):
    low = {a: v for a, v in s.coeffs.items() if sum(a) <= q_out}
    high = {a: v for a, v in s.coeffs.items() if sum(a) > q_out}
    return low, high


def _geometric_tail(per_degree: dict, a_max: int):
    """Extrapolate sum_{q > a_max} c_q from the last two nonzero c_q (log values)."""
    known = sorted(q for q, v in per_degree.items() if q >= 1 and v != NEG_INF)
    if not known:
        return mp.zero
    if len(known) < 2:
        return POS_INF
    q1, q2 = known[-2], known[-1]
    ln_ratio = (per_degree[q2] - per_degree[q1]) / (q2 - q1)
    if ln_ratio >= 0:
        return POS_INF
    ratio = mp.exp(ln_ratio)
    first = per_degree[q2] + (a_max + 1 - q2) * ln_ratio
    return mp.exp(first) / (1 - ratio)


def apply_operator(symbol: OperatorSymbol, f: EntireSeries, dst_order: NormalizedOrder,
                   sigma_out, radial_grid: int = 200):
    """Apply the truncated operator to f; returns ``(Pf, tail_bound)``.

    Exact payloads are treated as polynomials and summed without truncation.
    Otherwise the output keeps degrees up to ``f.q_max - a_max``; the norm
    (under ``dst_order`` and ``sigma_out``) of every computed term that lands
    above that degree is added to ``tail_bound``.  Unless the symbol is
    complete, the terms with ``|alpha| > a_max`` are estimated by geometric
    extrapolation of ||a_alpha||_{sigma/2} ||d^alpha f||_{sigma/2} from the
    two highest nonzero degrees (``inf`` if that is not decaying).
    """
    if symbol.n != f.n:
        raise DomainError(f"variable counts differ: symbol n={symbol.n}, series n={f.n}")
    if f.q_max < symbol.a_max:
        raise PreconditionError(f"series q_max={f.q_max} < symbol a_max={symbol.a_max}")
    sigma_out = to_mp(sigma_out)
    exact = symbol.is_exact and f.is_exact
    n = f.n
    q_out = None if exact else f.q_max - symbol.a_max
    out: dict = {}
    dropped = []
    q_max_out = 0
    for alpha in mi.up_to_weight(n, symbol.a_max):
        a = symbol.table.get(alpha)
        if a is None:
            continue
        d = f.derivative(alpha)
        if not d.coeffs:
            continue
        prod = a * d
        if exact:
            q_max_out = max(q_max_out, prod.degree())
            items = prod.coeffs.items()
        else:
            low, high = _split_high(prod, q_out)
            if high:
                dropped.append(EntireSeries(n, prod.q_max, high))
            items = low.items()
        for g, v in items:
            out[g] = out[g] + v if g in out else v
    result = EntireSeries(n, max(q_max_out, 0) if exact else q_out, out)

    tail = mp.zero
    for piece in dropped:
        tail += weighted_norm_details(piece, dst_order, sigma_out, radial_grid).value
    if not symbol.complete and not (f.is_exact and f.degree() <= symbol.a_max):
        tail += _cut_estimate(symbol, f, dst_order, sigma_out, radial_grid)
    return result, tail


def _cut_estimate(symbol, f, order, sigma_out, radial_grid):
    half = sigma_out / 2
    nonzero = sorted({sum(a) for a in symbol.table if sum(a) >= 1})
    if not nonzero:
        return mp.zero
    per_degree = {}
    for q in nonzero[-2:]:
        logs = []
        for alpha in mi.of_weight(symbol.n, q):
            a = symbol.table.get(alpha)
            if a is None:
                continue
            d = f.derivative(alpha)
            if not d.coeffs:
                continue
            logs.append(weighted_norm_details(a, order, half, radial_grid).ln_value
                        + weighted_norm_details(d, order, half, radial_grid).ln_value)
        per_degree[q] = mp_logsumexp(logs)
    return _geometric_tail(per_degree, symbol.a_max)


# ---------------------------------------------------------------------------
# classification


@dataclass
class SymbolClassVerdict:
    mode: str
    verdict: str
    fitted: list = field(default_factory=list)
    margins: dict = field(default_factory=dict)
    diagnostics: str = ""

    def to_json(self) -> dict:
        def conv(v):
            if isinstance(v, (bool, str, int)) or v is None:
                return v
            return format_real(to_mp(v))
        return {"mode": self.mode, "verdict": self.verdict,
                "fitted": [{k: conv(v) for k, v in item.items()} for item in self.fitted],
                "margins": {k: conv(v) for k, v in self.margins.items()},
                "diagnostics": self.diagnostics}


def check_comparable(src: NormalizedOrder, dst: NormalizedOrder, u_max: float = 1e4,
                     points: int = 200) -> bool:
    """Grid check of r^rho1(r) = O(r^rho2(r)): ln w1 - ln w2 must not drift upward."""
    u_lo = max(to_mp(src.u1 or 1), to_mp(dst.u1 or 1), mp.mpf(10))
    us = [u_lo * (mp.mpf(u_max) / u_lo) ** (mp.mpf(i) / (points - 1)) for i in range(points)]
    diffs = {i: src.lnw_u(u) - dst.lnw_u(u) for i, u in enumerate(us)}
    if not max(diffs.values()) < mp.mpf(10) ** 6:
        return False
    # trend of the gap against ln u over the upper half of the grid
    half = {float(mp.log(us[i])): diffs[i] for i in range(points // 2, points)}
    xs = sorted(half)
    mean_x = sum(xs) / len(xs)
    mean_y = sum(float(half[x]) for x in xs) / len(xs)
    slope = sum((x - mean_x) * (float(half[x]) - mean_y) for x in xs) / \
        sum((x - mean_x) ** 2 for x in xs)
    return slope <= 0.01


def _ln_ratios(symbol, scale, dst, sigma, radial_grid):
    """alpha -> ln(||a_alpha||_{dst, sigma} alpha! / G_|alpha|) (upper estimates)."""
    out = {}
    for alpha, a in symbol.table.items():
        q = sum(alpha)
        if a.degree() == 0:
            ln_norm = log_abs(a[mi.zero(symbol.n)])
        else:
            ln_norm = weighted_norm_details(a, dst, sigma, radial_grid).ln_value
        out[alpha] = ln_norm + mi.ln_factorial(alpha) - scale[q]
    return out


def _ln_witness(symbol, scale):
    """alpha -> ln(|a_alpha(0)| alpha! / G_|alpha|), a lower bound of the ratio for every sigma."""
    out = {}
    zero = mi.zero(symbol.n)
    for alpha, a in symbol.table.items():
        v = a[zero]
        if v:
            out[alpha] = log_abs(v) + mi.ln_factorial(alpha) - scale[sum(alpha)]
    return out


def _per_degree(ratios: dict, ln_lambda=0):
    per = {}
    for alpha, v in ratios.items():
        q = sum(alpha)
        val = v - q * ln_lambda
        per[q] = max(per.get(q, NEG_INF), val)
    return per


def _tail_of(per: dict, window_frac: float):
    if not per:
        return None
    q_top = max(per)
    q_lo = math.ceil((1 - window_frac) * q_top)
    return _tail({q: v for q, v in per.items() if q >= q_lo})


def _stable(per: dict, window_frac: float) -> bool:
    tail = _tail_of(per, window_frac)
    return tail is None or len(tail.qs) < 2 or tail.slope <= 0


def classify_symbol(symbol: OperatorSymbol, src: NormalizedOrder, dst: NormalizedOrder,
                    mode: str, probes=None, scale: GrowthScale | None = None,
                    window_frac: float = 0.25, radial_grid: int = 200) -> SymbolClassVerdict:
    """Probe membership of the symbol in D_{src -> dst} (NormalType) or D_{src -> dst, 0}.

    NormalType: for each probed lambda, sigma is searched downward from the
    top of the ladder; the probe succeeds when the per-degree constants
    C_q = max_{|alpha|=q} ||a_alpha||_sigma alpha! / (G_q lambda^q) show no
    upward trend over the tail.  A probe fails (NotMember) only when the
    sigma-independent lower bound |a_alpha(0)| alpha! / (G_q lambda^q)
    exceeds 1e8 and is still rising with no turning point in sight: the
    secant slopes of its logarithm, fitted as A + B ln|alpha| over the tail,
    must not reach zero before 1000 times the largest probed degree.

    MinimalType: for each probed sigma, lambda is fitted from the tail slope
    of ln(||a_alpha|| alpha! / G_q) against |alpha| and then verified.
    """
    if mode not in (NORMAL_TYPE, MINIMAL_TYPE):
        raise DomainError(f"mode must be {NORMAL_TYPE} or {MINIMAL_TYPE}, got {mode!r}")
    if scale is None:
        scale = growth_scale(src, max(symbol.a_max, 1))
    if scale.order != src:
        raise PreconditionError("growth scale was built on a different source order")
    if scale.q_max < symbol.a_max:
        raise PreconditionError(f"growth scale q_max={scale.q_max} < a_max={symbol.a_max}")
    if not check_comparable(src, dst):
        raise PreconditionError("source weight is not O(destination weight) on the check grid")
    probes = [to_mp(p) for p in (probes if probes is not None else DEFAULT_LADDER)]
    if any(not p > 0 for p in probes):
        raise DomainError("probes must be positive")
    if mode == NORMAL_TYPE:
        return _classify_normal(symbol, src, dst, probes, scale, window_frac, radial_grid)
    return _classify_minimal(symbol, dst, probes, scale, window_frac, radial_grid)


def _classify_normal(symbol, src, dst, probes, scale, window_frac, radial_grid):
    ladder = sorted((to_mp(s) for s in DEFAULT_LADDER), reverse=True)
    witness = _ln_witness(symbol, scale)
    ratio_cache: dict = {}

    def ratios(sigma):
        if sigma not in ratio_cache:
            ratio_cache[sigma] = _ln_ratios(symbol, scale, dst, sigma, radial_grid)
        return ratio_cache[sigma]

    fitted, margins, verdicts, notes = [], {}, [], []
    for lam in probes:
        ln_lam = mp.log(lam)
        found = None
        for sigma in ladder:
            per = _per_degree(ratios(sigma), ln_lam)
            if not _stable(per, window_frac):
                break
            found = (sigma, max(per.values()) if per else NEG_INF, per)
        key = f"lambda={mp.nstr(lam, 6)}"
        if found is not None:
            sigma, ln_C, per = found
            fitted.append({"lambda": lam, "sigma": sigma, "C": mp.exp(ln_C),
                           "argmax_q": max(per, key=per.get) if per else 0})
            tail = _tail_of(per, window_frac)
            margins[key] = -tail.slope if tail is not None and len(tail.qs) > 1 else POS_INF
            verdicts.append(MEMBER)
            continue
        wper = _per_degree(witness, ln_lam)
        wtail = _tail_of(wper, window_frac)
        w_max = max(wper.values()) if wper else NEG_INF
        margins[key] = w_max - mp.log(WITNESS_THRESHOLD)
        if (wtail is not None and w_max > mp.log(WITNESS_THRESHOLD) and wtail.slope > 0
                and _keeps_rising(wper, window_frac)):
            first = min(q for q, v in wper.items() if v > mp.log(WITNESS_THRESHOLD))
            fitted.append({"lambda": lam, "witness": mp.exp(w_max),
                           "first_q_above_threshold": first})
            verdicts.append(NOT_MEMBER)
            notes.append(f"{key}: lower-bound ratio passes 1e8 at |alpha|={first} and keeps rising")
        else:
            fitted.append({"lambda": lam})
            verdicts.append(INCONCLUSIVE)
            notes.append(f"{key}: no stable C on the sigma ladder and no divergence witness")
    verdict = (NOT_MEMBER if NOT_MEMBER in verdicts
               else INCONCLUSIVE if INCONCLUSIVE in verdicts else MEMBER)
    diag = f"probed lambda in {[mp.nstr(p, 6) for p in probes]}"
    if notes:
        diag += "; " + "; ".join(notes)
    return SymbolClassVerdict(NORMAL_TYPE, verdict, fitted, margins, diag)


def _classify_minimal(symbol, dst, probes, scale, window_frac, radial_grid):
    witness_per = _per_degree(_ln_witness(symbol, scale))
    fitted, margins, verdicts, notes = [], {}, [], []
    for sigma in probes:
        key = f"sigma={mp.nstr(sigma, 6)}"
        per = _per_degree(_ln_ratios(symbol, scale, dst, sigma, radial_grid))
        per = {q: v for q, v in per.items() if q >= 1 or len(per) == 1}
        tail = _tail_of(per, window_frac)
        if tail is None or len(tail.qs) < 2:
            ln_lam = mp.zero
        else:
            ln_lam = mp.mpf(tail.slope) + mp.mpf("1e-3")
        shifted = {q: v - q * ln_lam for q, v in per.items()}
        if _stable(shifted, window_frac):
            ln_C = max(shifted.values(), default=NEG_INF)
            fitted.append({"sigma": sigma, "lambda": mp.exp(ln_lam), "C": mp.exp(ln_C)})
            stail = _tail_of(shifted, window_frac)
            margins[key] = -stail.slope if stail is not None and len(stail.qs) > 1 else POS_INF
            verdicts.append(MEMBER)
            continue
        # superlinear growth of the lower bound rules out every lambda
        wt = _secant_trend(witness_per)
        margins[key] = -wt
        if wt > 0.1:
            verdicts.append(NOT_MEMBER)
            notes.append(f"{key}: lower-bound log ratio grows faster than linearly in |alpha|")
        else:
            verdicts.append(INCONCLUSIVE)
            notes.append(f"{key}: fitted lambda does not yield a stable C")
        fitted.append({"sigma": sigma})
    verdict = (NOT_MEMBER if NOT_MEMBER in verdicts
               else INCONCLUSIVE if INCONCLUSIVE in verdicts else MEMBER)
    diag = f"probed sigma in {[mp.nstr(p, 6) for p in probes]}"
    if notes:
        diag += "; " + "; ".join(notes)
    return SymbolClassVerdict(MINIMAL_TYPE, verdict, fitted, margins, diag)


def _keeps_rising(per: dict, window_frac: float) -> bool:
    """Whether a per-degree log sequence is predicted to rise far beyond the table."""
    q_top = max(per)
    q_lo = math.ceil((1 - window_frac) * q_top)
    qs = sorted(q for q, v in per.items() if q >= max(q_lo, 1) and v != NEG_INF)
    if len(qs) < 3:
        return False
    xs = [math.log(qs[i]) for i in range(1, len(qs))]
    sec = [float((per[qs[i]] - per[qs[i - 1]]) / (qs[i] - qs[i - 1])) for i in range(1, len(qs))]
    B, A = np.polyfit(xs, sec, 1)
    if sec[-1] <= 0 or A + B * xs[-1] <= 0:
        return False
    if B >= 0:
        return True
    return -A / B > math.log(1000 * q_top)


def _secant_trend(per: dict, window_frac: float = 1.0) -> float:
    """Slope against ln q of the secant slopes of a per-degree log sequence (over the tail)."""
    q_lo = math.ceil((1 - window_frac) * max(per, default=0))
    qs = sorted(q for q, v in per.items() if q >= max(q_lo, 1) and v != NEG_INF)
    if len(qs) < 4:
        return 0.0
    sec = {qs[i]: (per[qs[i]] - per[qs[i - 1]]) / (qs[i] - qs[i - 1]) for i in range(1, len(qs))}
    tail = _tail(sec)
    return tail.slope_ln


# ---------------------------------------------------------------------------
# the Schroedinger example


@dataclass(frozen=True)
class ExampleRatio:
    ln_R: tuple
    first_j_below: int | None
    tail_decreasing: bool
    limit_grid: tuple
    limit_decreasing: bool

    def to_json(self) -> dict:
        return {"ln_R": [format_real(v) for v in self.ln_R],
                "first_j_below_1e-8": self.first_j_below,
                "tail_decreasing": self.tail_decreasing,
                "t_over_phi_t_squared": [[format_real(t), format_real(v)]
                                         for t, v in self.limit_grid],
                "limit_decreasing": self.limit_decreasing}


def example_ratio(order: NormalizedOrder, t, eps, j_max: int) -> ExampleRatio:
    """ln R_j, R_j = (2j/phi(2j)^2 * 2e|t|/eps^2)^j (2j-1)!!/(2j)^j, for j = 1..j_max."""
    if order.rho != 2:
        raise PreconditionError(f"the example needs rho = 2, got {order.rho}")
    abs_t, eps = abs(to_mp(t)), to_mp(eps)
    if not eps > 0:
        raise DomainError("eps must be positive")
    ln_R = []
    for j in range(1, j_max + 1):
        if abs_t == 0:
            ln_R.append(NEG_INF)
            continue
        ln2j = mp.log(2 * j)
        ln_dfact = mi.ln_factorial((2 * j,)) - j * mp.log(2) - mi.ln_factorial((j,))
        base = ln2j - 2 * ln_phi(order, ln2j) + mp.log(2 * mp.e * abs_t) - 2 * mp.log(eps)
        ln_R.append(j * base + ln_dfact - j * ln2j)
    threshold = -8 * mp.log(10)
    first = next((j + 1 for j, v in enumerate(ln_R) if v < threshold), None)
    tail = ln_R[-max(j_max // 4, 2):]
    decreasing = all(b <= a for a, b in zip(tail, tail[1:]))
    grid = []
    for k in range(1, 41):
        tt = mp.mpf(10) ** k
        grid.append((tt, tt / mp.exp(2 * ln_phi(order, mp.log(tt)))))
    vals = [v for _, v in grid]
    limit_dec = all(b < a for a, b in zip(vals[len(vals) // 2:], vals[len(vals) // 2 + 1:]))
    return ExampleRatio(tuple(ln_R), first, decreasing, tuple(grid), limit_dec)
