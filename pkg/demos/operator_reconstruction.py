"""From a linear map on monomials to the differential operator that realises it.

A continuous linear map F is determined by the images F(z^beta)/beta!; the
symbol a_alpha(z) of the equivalent operator sum a_alpha(z) d^alpha follows
from an exact inversion formula.  Here F is translation by 3/2.

Run:  python3 demos/operator_reconstruction.py
"""

import math
from fractions import Fraction

from proxdiff import (
    EntireSeries,
    HomImageTable,
    ProximateOrder,
    apply_operator,
    hom_to_symbol,
    normalize,
    symbol_to_hom,
)
from proxdiff.oracle import RationalPoly

c = Fraction(3, 2)
b_max = 8
images = {}
for q in range(b_max + 1):
    shifted = RationalPoly.monomial((q,), Fraction(1, math.factorial(q))).shift((c,))
    images[(q,)] = EntireSeries(1, q, shifted.coeffs)

symbol = hom_to_symbol(HomImageTable(1, b_max, images))
print("reconstructed symbol of f(z) -> f(z + 3/2):")
for (j,), a in sorted(symbol.table.items()):
    print(f"  a_{j} = {a[(0,)]}   (c^j/j! = {c ** j / math.factorial(j)})")

assert symbol_to_hom(symbol).images == images
print("round trip back to the images is exact")

f = EntireSeries.univariate([1, 0, -2, 0, 1])     # (z^2 - 1)^2
g, tail = apply_operator(symbol, EntireSeries(1, b_max, f.coeffs),
                         normalize(ProximateOrder("constant", 1)), 1)
print("P applied to (z^2-1)^2 gives coefficients",
      [str(g[(q,)]) for q in range(5)], "with tail bound", tail)
