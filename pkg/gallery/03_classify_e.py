"""
Which L_p norms improve Dirichlet for e?
=========================================

Euler's number has digits 1, 2, 1, 1, 4, 1, 1, 6, ...  Its blocks
2k, 1, 1, 2k+2 are flanked patterns x,1,1,y with growing flanks, which
rule out improvability for p in [2, p0] and p = 1, whereas for p in
(1, 2) or above p0 the required symmetric patterns cannot occur.
"""

from lpdirichlet.cf import CFExpansion
from lpdirichlet.classifier import X11Y, classify, classify_e, scan
from lpdirichlet.lp import INF, p_zero

rep = scan(CFExpansion.e(), {X11Y}, 200)
print("records of min(x, y) around 1,1 in e:", rep["x11y"].records[:10])

for p in [1, 1.2, 1.5, 1.9, 2, 2.3, p_zero(), 2.7, 3, 10, INF]:
    v = classify_e(p)
    print(f"p = {p:<8.5g} {v.regime.tag:<10} {v.status:<24} {v.justification}")

# Quadratic irrationals are decided from their period.
for period in [(1,), (2,), (1, 2)]:
    x = CFExpansion.periodic(0, (), period)
    print(f"period {period}: p=2 -> {classify(x, 2).status}")
