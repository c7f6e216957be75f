"""
Watching the lattice flow
=========================

The Dirichlet constant of alpha is the limsup of the first successive
minimum of the lattice g_t u_alpha Z^2 along the times where the two
successive minima meet.  Euler's number sits on the bound for p = 2.3,
while the golden ratio stays strictly below it.
"""

from lpdirichlet.cf import CFExpansion
from lpdirichlet.flow import critical_times, crossing_locus_distances
from lpdirichlet.lp import INF, dirichlet_bound

p = 2.3
bound = dirichlet_bound(p)
print(f"bound 1/sqrt(Delta_{p}) = {bound:.6f}")

for name, x in [("e", CFExpansion.e()), ("golden", CFExpansion.golden())]:
    est = critical_times(x, p, 1e6)
    print(f"{name:>7}: {len(est.crossings)} crossings, d_estimate = {est.d_estimate:.6f}, "
          f"gap to bound = {bound - est.d_estimate:.4f}")

# Near the bound the lattice at a crossing approaches the critical locus, slowly.
est = critical_times(CFExpansion.e(), p, 1e8)
dists = crossing_locus_distances(CFExpansion.e(), est)
best = float("inf")
for c, d in zip(est.crossings, dists):
    if d < best:
        best = d
        print(f"  t = {c.t:14.1f}  distance to critical locus {d:.4f}")

# For the sup norm the crossing values are q_{n+1} ||q_n alpha|| exactly.
est = critical_times(CFExpansion.golden(), INF, 1e4)
print(f"golden, sup norm: d^2 = {est.d_estimate ** 2:.6f} (1/(3 - phi) = 0.723607)")
