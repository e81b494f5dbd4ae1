"""The free Schroedinger propagator exp(i t/2 d^2) as an infinite-order operator.

With t = 1 its symbol a_{2j} = (i/2)^j / j! acts continuously on the growth
class of a proximate order tending to 2 from below, and on the minimal-type
class of order 2, but not on the normal-type class of order 2.

Run:  python3 demos/schrodinger_example.py
"""

from proxdiff import (
    ProximateOrder,
    classify_symbol,
    example_ratio,
    mp,
    normalize,
    schrodinger_symbol,
)
from proxdiff.diffop import MINIMAL_TYPE, NORMAL_TYPE

loglog = normalize(ProximateOrder("loglog", 2, -1))
const2 = normalize(ProximateOrder("constant", 2))
symbol = schrodinger_symbol(1, 200)

ratio = example_ratio(loglog, t=1, eps=1, j_max=400)
print("ln R_j for the LogLog order (j = 1, 50, 100, 200, 400):",
      [mp.nstr(ratio.ln_R[j - 1], 6) for j in (1, 50, 100, 200, 400)])
print("first j with R_j < 1e-8:", ratio.first_j_below)

for label, src, mode, probes in [
    ("normal type, LogLog order", loglog, NORMAL_TYPE, [1]),
    ("normal type, rho = 2     ", const2, NORMAL_TYPE, [mp.mpf("0.5")]),
    ("minimal type, rho = 2    ", const2, MINIMAL_TYPE, None),
]:
    v = classify_symbol(symbol, src, src, mode, probes)
    print(f"{label}: {v.verdict}")
    print(f"    {v.diagnostics}")
