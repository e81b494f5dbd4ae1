"""Proximate orders, their normalization, the inverse map phi and the growth scale.

Everything is evaluated in the variable ``u = ln r`` so that weights
``r**rho(r)`` are only ever handled through their logarithms.

Three concrete families are supported::

    constant     rho(r) = rho
    loglog       rho(r) = rho + k * ln ln r / ln r
    logloglog    rho(r) = rho + k * ln ln ln r / ln r

Below ``r_cut`` the order is frozen to the constant ``rho(r_cut)`` and a C^1
smoothstep on ``[r_cut, 2 r_cut]`` joins the constant to the family formula,
so the order is differentiable on ``r > 0``.  An optional ``log_scale = ln c``
adds ``ln c / ln r`` (switched on by the same smoothstep), which multiplies the
weight by ``c`` for ``r >= 2 r_cut``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache

import numpy as np

from ._numbers import (
    ConstructionError,
    DomainError,
    PreconditionError,
    SolverRangeError,
    format_real,
    mp,
    parse_scalar,
    to_mp,
)

FAMILIES = ("constant", "loglog", "logloglog")

DEFAULT_R_CUT = 16
DEFAULT_SOLVER_TOL = mp.mpf("1e-25")
_U_LIMIT = 1024 * mp.log(2)


@dataclass(frozen=True)
class ProximateOrder:
    family: str
    rho: object
    k: object = 0
    r_cut: object = DEFAULT_R_CUT
    log_scale: object = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        rho, r_cut = to_mp(self.rho), to_mp(self.r_cut)
        if not rho > 0:
            raise DomainError(f"rho must be positive, got {self.rho}")
        min_cut = mp.e if self.family == "logloglog" else mp.one
        if not r_cut > min_cut:
            raise DomainError(f"r_cut must exceed {mp.nstr(min_cut, 6)} for family "
                              f"{self.family!r}, got {self.r_cut}")
        if not _family_value(self, mp.log(r_cut))[0] > 0:
            raise DomainError("the order must stay positive; rho(r_cut) <= 0")

    @property
    def is_pure_constant(self) -> bool:
        return self.family == "constant" and to_mp(self.log_scale) == 0


def _family_value(order: ProximateOrder, u):
    """Family formula F and r*F'(r) at r = e^u (u > 0)."""
    rho, k = to_mp(order.rho), to_mp(order.k)
    if order.family == "constant" or k == 0:
        return rho, mp.zero
    if order.family == "loglog":
        llr = mp.log(u)
        return rho + k * llr / u, k * (1 - llr) / (u * u)
    llr = mp.log(u)
    lllr = mp.log(llr)
    return rho + k * lllr / u, k * (1 / llr - lllr) / (u * u)


def _order_u(order: ProximateOrder, u):
    """Return (rho(r), r*rho'(r)) at r = e^u."""
    r_cut = to_mp(order.r_cut)
    u_cut = mp.log(r_cut)
    ls = to_mp(order.log_scale)
    if order.is_pure_constant:
        return to_mp(order.rho), mp.zero
    c0 = _family_value(order, u_cut)[0]
    if u <= u_cut:
        return c0, mp.zero
    if u >= u_cut + mp.log(2):
        F, rdF = _family_value(order, u)
        return F + ls / u, rdF - ls / (u * u)
    r = mp.exp(u)
    x = (r - r_cut) / r_cut
    s = x * x * (3 - 2 * x)
    r_ds = r * 6 * x * (1 - x) / r_cut
    F, rdF = _family_value(order, u)
    value = c0 + s * (F - c0) + s * ls / u
    deriv = r_ds * (F - c0) + s * rdF + r_ds * ls / u - s * ls / (u * u)
    return value, deriv


def eval_order(order: ProximateOrder, r) -> tuple:
    """Evaluate rho(r) and rho'(r)."""
    r = to_mp(r)
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")
    value, r_deriv = _order_u(order, mp.log(r))
    return value, r_deriv / r


def order_weight_slope(order: ProximateOrder, u):
    """d/du [rho(e^u) * u], i.e. r d/dr ln r^rho(r)."""
    value, r_deriv = _order_u(order, u)
    return value + r_deriv * u


# ---------------------------------------------------------------------------
# normalization


@dataclass(frozen=True)
class NormalizedOrder:
    """A proximate order whose weight is spliced log-linearly below ``r1``.

    For ``r < r1`` the weight is ``c * r**s`` with value and slope matched at
    ``r1``; for ``r >= r1`` it coincides with the base order.  A rescaled base
    order (``log_scale = ln c``) is normalized as ``c`` times the normalized
    weight of the unscaled order, so the two weights differ by exactly ``c``.
    """

    base: ProximateOrder
    r1: object
    discrepancy: object
    solver_tol: object = DEFAULT_SOLVER_TOL
    u1: object = field(default=None, repr=False)
    L1: object = field(default=None, repr=False)
    slope1: object = field(default=None, repr=False)

    @property
    def rho(self):
        return to_mp(self.base.rho)

    @cached_property
    def core(self) -> ProximateOrder:
        """The base order without its rescaling term."""
        return replace(self.base, log_scale=0)

    @cached_property
    def ln_c(self):
        return to_mp(self.base.log_scale)

    def lnw_u(self, u):
        """ln of the normalized weight at r = e^u."""
        if self.base.family == "constant":
            return self.rho * u + self.ln_c
        if u >= self.u1:
            value, _ = _order_u(self.core, u)
            return value * u + self.ln_c
        return self.L1 + self.slope1 * (u - self.u1) + self.ln_c

    def dlnw_u(self, u):
        if self.base.family == "constant":
            return self.rho
        if u >= self.u1:
            return order_weight_slope(self.core, u)
        return self.slope1


def normalize(order: ProximateOrder, solver_tol=None, points_per_octave: int = 8,
              max_log2_r: int = 512, discrepancy_points: int = 10_000) -> NormalizedOrder:
    """Normalize ``order`` so that r -> r**rho_hat(r) is an increasing bijection."""
    tol = DEFAULT_SOLVER_TOL if solver_tol is None else to_mp(solver_tol)
    return _normalize_cached(order, mp.prec, tol, points_per_octave, max_log2_r,
                             discrepancy_points)


@lru_cache(maxsize=128)
def _normalize_cached(order, prec, tol, points_per_octave, max_log2_r, discrepancy_points):
    if to_mp(order.log_scale) != 0:
        core = _normalize_cached(replace(order, log_scale=0), prec, tol, points_per_octave,
                                 max_log2_r, discrepancy_points)
        return replace(core, base=order)
    u_cut = mp.log(to_mp(order.r_cut))
    if order.is_pure_constant:
        rho = to_mp(order.rho)
        return NormalizedOrder(order, to_mp(order.r_cut), mp.zero, tol,
                               u_cut, rho * u_cut, rho)

    step = mp.log(2) / points_per_octave
    n_grid = int(max_log2_r * points_per_octave) + 1
    last_bad = None
    for i in range(n_grid):
        u = u_cut + i * step
        if not order_weight_slope(order, u) > 0:
            last_bad = i
    if last_bad == n_grid - 1:
        raise ConstructionError("weight is not increasing at the end of the search "
                                f"range r <= r_cut * 2^{max_log2_r}")
    u1 = u_cut if last_bad is None else u_cut + (last_bad + 1) * step
    value, _ = _order_u(order, u1)
    L1 = value * u1
    slope1 = order_weight_slope(order, u1)
    partial = NormalizedOrder(order, mp.exp(u1), mp.zero, tol, u1, L1, slope1)

    # sup over (0, r1] of |r^rho_hat - r^rho|, both weights vanish as r -> 0
    gaps = []
    for j in range(discrepancy_points):
        u = u1 - 60 * mp.mpf(j) / (discrepancy_points - 1)
        base_lnw = _order_u(order, u)[0] * u
        gaps.append(abs(mp.exp(partial.lnw_u(u)) - mp.exp(base_lnw)))
    return replace(partial, discrepancy=max(gaps))


def ln_weight(order: NormalizedOrder, r):
    """ln(r**rho_hat(r)) = rho_hat(r) ln r."""
    r = to_mp(r)
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")
    return order.lnw_u(mp.log(r))


def ln_phi(order: NormalizedOrder, ln_t):
    """ln phi(t) for t = e^{ln_t}: solves lnw(u) = ln_t for u."""
    y = to_mp(ln_t) - order.ln_c
    if order.base.family == "constant":
        return y / order.rho
    order = replace(order, base=order.core)
    tol = to_mp(order.solver_tol) * max(mp.one, abs(y))

    u0 = y / order.rho
    width = mp.one
    lo, hi = u0 - width, u0 + width
    while order.lnw_u(lo) > y:
        width *= 2
        lo = u0 - width
        if lo < -_U_LIMIT:
            raise SolverRangeError(f"no bracket for phi(e^{mp.nstr(y, 8)}) above 2^-1024")
    width = mp.one
    while order.lnw_u(hi) < y:
        width *= 2
        hi = u0 + width
        if hi > _U_LIMIT:
            raise SolverRangeError(f"no bracket for phi(e^{mp.nstr(y, 8)}) below 2^1024")

    for _ in range(8):
        mid = (lo + hi) / 2
        if order.lnw_u(mid) < y:
            lo = mid
        else:
            hi = mid
    u = (lo + hi) / 2
    for _ in range(200):
        resid = order.lnw_u(u) - y
        if abs(resid) <= tol:
            # one more Newton step costs nothing and buys many digits
            u_next = u - resid / order.dlnw_u(u)
            return u_next if lo <= u_next <= hi else u
        if resid < 0:
            lo = u
        else:
            hi = u
        u_next = u - resid / order.dlnw_u(u)
        u = u_next if lo < u_next < hi else (lo + hi) / 2
    raise SolverRangeError(f"phi did not converge for ln t = {mp.nstr(y, 10)}")


def phi(order: NormalizedOrder, t):
    """Inverse of t = r**rho_hat(r)."""
    t = to_mp(t)
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    return mp.exp(ln_phi(order, mp.log(t)))


# ---------------------------------------------------------------------------
# growth scale


@dataclass(frozen=True)
class GrowthScale:
    order: NormalizedOrder
    q_max: int
    ln_G: tuple

    def __getitem__(self, q: int):
        return self.ln_G[q]

    def to_json(self) -> dict:
        return {"rho": format_real(self.order.rho), "q_max": self.q_max,
                "ln_G": [format_real(v) for v in self.ln_G]}


def growth_scale(order: NormalizedOrder, q_max: int) -> GrowthScale:
    """Table of ln G_q = q ln phi(q) - (q/rho)(1 + ln rho), q = 0..q_max."""
    if q_max < 1:
        raise PreconditionError(f"q_max must be >= 1, got {q_max}")
    return _growth_scale_cached(order, int(q_max), mp.prec)


@lru_cache(maxsize=64)
def _growth_scale_cached(order, q_max, prec):
    rho = order.rho
    c = (1 + mp.log(rho)) / rho
    ln_G = [mp.zero]
    for q in range(1, q_max + 1):
        ln_G.append(q * ln_phi(order, mp.log(q)) - q * c)
    return GrowthScale(order, q_max, tuple(ln_G))


# ---------------------------------------------------------------------------
# numerical checks of the auxiliary lemmas


@dataclass
class LemmaReport:
    lemma_id: str
    fitted_constants: dict
    grid: str
    max_violation: float
    passed: bool

    def to_json(self) -> dict:
        return {"lemma_id": self.lemma_id,
                "fitted_constants": {k: _json_num(v) for k, v in self.fitted_constants.items()},
                "grid": self.grid,
                "max_violation": _json_num(self.max_violation),
                "passed": self.passed}


def _json_num(v):
    if isinstance(v, (bool, str)) or v is None:
        return v
    if isinstance(v, int):
        return v
    return format_real(to_mp(v))


def verify_subadditivity(order: NormalizedOrder, kappa, grid_size: int = 40,
                         n_random: int = 2000, seed: int = 0,
                         r_range=(1e-3, 1e6)) -> LemmaReport:
    """Fit B in (r+s)^rho(r+s) <= kappa (r^rho(r) + s^rho(s)) + B and re-check it."""
    kappa = to_mp(kappa)
    if not kappa > mp.power(2, order.rho):
        raise PreconditionError(f"kappa must exceed 2^rho = {mp.nstr(mp.power(2, order.rho), 10)}")
    u_lo, u_hi = mp.log(to_mp(r_range[0])), mp.log(to_mp(r_range[1]))

    def excess(u, v):
        w_sum = mp.exp(order.lnw_u(mp.log(mp.exp(u) + mp.exp(v))))
        return w_sum - kappa * (mp.exp(order.lnw_u(u)) + mp.exp(order.lnw_u(v)))

    grid = [u_lo + (u_hi - u_lo) * i / (grid_size - 1) for i in range(grid_size)]
    best, arg = None, (grid[0], grid[0])
    for i, u in enumerate(grid):
        for v in grid[i:]:
            e = excess(u, v)
            if best is None or e > best:
                best, arg = e, (u, v)
    # local refinement around the best grid pair
    h = (u_hi - u_lo) / (grid_size - 1)
    for a in range(-10, 11):
        for b in range(-10, 11):
            u = min(max(arg[0] + a * h / 10, u_lo), u_hi)
            v = min(max(arg[1] + b * h / 10, u_lo), u_hi)
            best = max(best, excess(u, v))
    B = max(best, mp.zero)

    rng = np.random.default_rng(seed)
    samples = rng.uniform(float(u_lo), float(u_hi), size=(n_random, 2))
    worst = max(excess(mp.mpf(u), mp.mpf(v)) - B for u, v in samples)
    return LemmaReport("pseudo-subadditivity", {"kappa": kappa, "B": B},
                       f"{grid_size}x{grid_size} log grid + {n_random} random pairs, "
                       f"r,s in [{r_range[0]}, {r_range[1]}], seed {seed}",
                       worst, bool(worst <= 0))


def _suffix_threshold(grid, ok):
    """Index of the smallest grid point from which ``ok`` holds to the end."""
    idx = len(grid)
    for i in range(len(grid) - 1, -1, -1):
        if not ok[i]:
            break
        idx = i
    return idx


def verify_phi_derivative(order: NormalizedOrder, delta, t_range=(10, 1e8),
                          grid_size: int = 200) -> LemmaReport:
    """Find T_0 with (1/rho - delta)/t < phi'/phi < (1/rho + delta)/t for t >= T_0."""
    delta = to_mp(delta)
    rho = order.rho
    if not 0 < delta < 1 / rho:
        raise PreconditionError(f"delta must lie in (0, 1/rho) = (0, {mp.nstr(1 / rho, 10)})")
    lo, hi = mp.log(to_mp(t_range[0])), mp.log(to_mp(t_range[1]))
    ts = [mp.exp(lo + (hi - lo) * i / (grid_size - 1)) for i in range(grid_size)]
    viol = []
    for t in ts:
        h = t * mp.ldexp(1, -40)
        elasticity = t * (ln_phi(order, mp.log(t + h)) - ln_phi(order, mp.log(t - h))) / (2 * h)
        viol.append(max(elasticity - (1 / rho + delta), (1 / rho - delta) - elasticity))
    start = _suffix_threshold(ts, [v <= 0 for v in viol])
    grid_desc = f"{grid_size} log-spaced t in [{t_range[0]}, {t_range[1]}], central step t*2^-40"
    if start == len(ts):
        return LemmaReport("phi-log-derivative", {"delta": delta}, grid_desc, viol[-1], False)
    return LemmaReport("phi-log-derivative", {"delta": delta, "T_0": ts[start]},
                       grid_desc, max(viol[start:]), True)


def verify_y_bound(order: NormalizedOrder, sigma, sigma_prime, t_range=(1, 1e8),
                   grid_size: int = 120) -> LemmaReport:
    """Find T_1 with y_sigma(u,t) + ln(e rho)/rho <= -ln(sigma')/rho for u, t >= T_1."""
    sigma, sigma_prime = to_mp(sigma), to_mp(sigma_prime)
    if not 0 < sigma_prime < sigma:
        raise PreconditionError("need 0 < sigma_prime < sigma")
    rho = order.rho
    lo, hi = mp.log(to_mp(t_range[0])), mp.log(to_mp(t_range[1]))
    lnts = [lo + (hi - lo) * i / (grid_size - 1) for i in range(grid_size)]
    lnphi = np.array([float(ln_phi(order, x)) for x in lnts])
    t = np.exp(np.array([float(x) for x in lnts]))
    const = float((1 + mp.log(rho) + mp.log(sigma_prime)) / rho)
    # V[i, j]: u = t_i, t = t_j
    V = lnphi[None, :] - lnphi[:, None] - float(sigma) * t[None, :] / t[:, None] + const
    suffix = np.empty(grid_size)
    running = -np.inf
    for k in range(grid_size - 1, -1, -1):
        running = max(running, V[k, k:].max(), V[k:, k].max())
        suffix[k] = running
    grid_desc = f"{grid_size}x{grid_size} log grid, u,t in [{t_range[0]}, {t_range[1]}]"
    ok = np.nonzero(suffix <= 0)[0]
    if ok.size == 0:
        return LemmaReport("y-sigma-bound", {"sigma": sigma, "sigma_prime": sigma_prime},
                           grid_desc, suffix[-1], False)
    k = int(ok[0])
    return LemmaReport("y-sigma-bound",
                       {"sigma": sigma, "sigma_prime": sigma_prime, "T_1": mp.exp(lnts[k])},
                       grid_desc, float(suffix[k]), True)


# ---------------------------------------------------------------------------
# JSON


def order_from_json(obj) -> ProximateOrder:
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict) or "family" not in obj or "rho" not in obj:
        raise DomainError("order JSON needs at least 'family' and 'rho'")
    unknown = set(obj) - {"family", "rho", "k", "r_cut", "log_scale"}
    if unknown:
        raise DomainError(f"unknown order fields: {sorted(unknown)}")
    return ProximateOrder(
        family=obj["family"],
        rho=to_mp(parse_scalar(obj["rho"])),
        k=to_mp(parse_scalar(obj.get("k", 0))),
        r_cut=to_mp(parse_scalar(obj.get("r_cut", DEFAULT_R_CUT))),
        log_scale=to_mp(parse_scalar(obj.get("log_scale", 0))),
    )


def order_to_json(order: ProximateOrder) -> dict:
    out = {"family": order.family, "rho": format_real(to_mp(order.rho)),
           "k": format_real(to_mp(order.k)), "r_cut": format_real(to_mp(order.r_cut))}
    if to_mp(order.log_scale) != 0:
        out["log_scale"] = format_real(to_mp(order.log_scale))
    return out
