"""Predicted against counted: the square-free and cyclic densities.

For each registry curve this prints the truncated constant delta_E (M = 30,
local factors assembled over square-free m) next to the census ratio
h_E(x)/li(x), then the cyclicity constant c_E next to the share of primes
with cyclic reduction.

Three rows disagree on purpose.  The disc -4 and disc -3 curves have 2 | N_p at
every good ordinary prime because of rational 2-torsion, so their square-free
counts are zero while the local model, blind to rational torsion, predicts a
positive delta_E.  For disc -7 the prime 2 splits and d(2) = 1, which makes the
full series vanish; the small negative value is truncation at M = 30.

    python demos/density_vs_census.py [x]
"""
import sys

from cmcensus.census import squarefree_census
from cmcensus.cmcurve import registry
from cmcensus.density import Model, c_E_truncated, delta_E_truncated

x = int(float(sys.argv[1])) if len(sys.argv) > 1 else 10**6
print(f"x = {x:.0e}, M = 30\n")
print(f"{'curve':>7} {'delta_E':>8} {'h_E/li':>8} {'c_E':>8} {'cyclic':>8}")
for E in registry():
    r = squarefree_census(E, x)
    delta = delta_E_truncated(E, 30)
    c = c_E_truncated(E, 30, Model.FULL_IMAGE, x=min(x, 10**6))
    good = r.count_ordinary + r.count_supersingular
    print(f"{E.id:>7} {delta.value:8.4f} {r.count_squarefree / r.li_mass:8.4f} "
          f"{c.value:8.4f} {r.count_cyclic / good:8.4f}")
print(f"\ntail bound at M = 30: {delta.tail_bound:.3e}")
