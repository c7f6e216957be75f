"""
Critical constants of the L_p unit ball
=======================================

For each exponent p the unit ball of the L_p norm has a critical
determinant Delta_p, and an irrational number is Dirichlet improvable
for that norm when its Dirichlet constant stays below 1/sqrt(Delta_p).
This script tabulates sigma_p, Delta_p and the bound, and locates the
transition exponent p0 where the critical lattice family changes.
"""

import numpy as np

from lpdirichlet.classifier import regime_of
from lpdirichlet.lp import INF, catalog, constants, p_zero

p0 = p_zero()
print(f"transition exponent p0 = {p0:.15f}")

print(f"\n{'p':>8} {'sigma_p':>12} {'Delta_p':>12} {'bound':>12}  regime")
for p in [1.0, 1.5, 2.0, 2.3, p0, 3.0, 5.0, 10.0, INF]:
    c = constants(p)
    s = "-" if c.sigma is None else f"{c.sigma:.10f}"
    print(f"{p:>8.4f} {s:>12} {c.delta:>12.10f} {c.dirichlet_bound:>12.10f}  {regime_of(p).tag}")

# Every catalog lattice has determinant Delta_p and basis points on the unit sphere.
for p in np.linspace(1.2, 6, 5):
    fams = sorted({lat.family for lat in catalog(p)})
    dets = [lat.det for lat in catalog(p)]
    print(f"p = {p:.2f}: families {fams}, det spread {max(dets) - min(dets):.1e}")
