"""Proximate orders, the growth scale G_q and the type of an entire function.

Run:  python3 demos/growth_and_type.py
"""

from proxdiff import (
    ProximateOrder,
    estimate_type,
    eval_order,
    exp_series,
    growth_scale,
    mp,
    normalize,
    phi,
    weighted_norm,
)
from proxdiff.series import exp_of_power_series

# A proximate order that tends to 2 from below like 2 - ln ln r / ln r.
loglog = normalize(ProximateOrder("loglog", 2, -1))
print("rho(r) for the LogLog(2, -1) order:")
for r in (100, 10**4, 10**8, 10**16):
    print(f"  r = 1e{len(str(r)) - 1:<3} rho = {mp.nstr(eval_order(loglog.base, r)[0], 10)}")

# phi inverts t = r^rho(r); on a constant order it is just t^(1/rho).
const2 = normalize(ProximateOrder("constant", 2))
print("\nphi(t) on rho = 2 versus sqrt(t):")
for t in (10, 1000, 10**6):
    print(f"  t = {t:<8} phi = {mp.nstr(phi(const2, t), 12)}  sqrt = {mp.nstr(mp.sqrt(t), 12)}")

# G_q calibrates coefficient decay: for rho = 1 it is q^q / e^q.
scale = growth_scale(normalize(ProximateOrder("constant", 1)), 5)
print("\nln G_q for rho = 1:", [mp.nstr(v, 6) for v in scale.ln_G])

# The type of e^(2z) is 2 and of e^(z^2) is 1; the estimate reads it off the
# Taylor coefficients through G_q.
const1 = normalize(ProximateOrder("constant", 1))
print("\nestimated type of e^(2z)  :", mp.nstr(estimate_type(exp_series(2, 400), const1).sigma_hat, 8))
print("estimated type of e^(z^2):", mp.nstr(estimate_type(exp_of_power_series(2, 400), const2).sigma_hat, 8))

# Weighted sup norms: ||e^z||_sigma = sup e^r e^(-sigma r) is 1 for sigma >= 1.
for sigma in (1, 2, 4):
    print(f"||e^z|| at sigma = {sigma}: {mp.nstr(weighted_norm(exp_series(1, 200), const1, sigma), 10)}")
