"""
Building witnesses by digit insertion
=====================================

Inserting words into the digits of a well-behaved base number at sparse
positions 2^(i + c) changes which norms improve Dirichlet.  The three
presets give numbers in DI_p but not badly approximable, in DI_1 but not
DI_2, and in DI_2 but not DI_1.  The scanner sees the intended pattern
family grow and the complementary one stay silent.
"""

from lpdirichlet.classifier import classify, patterns_for, regime_of, scan
from lpdirichlet.constructors import (extract_base, witness_di1_minus_di2,
                                      witness_di2_minus_di1, witness_di_minus_ba)
from lpdirichlet.flow import critical_times
from lpdirichlet.lp import dirichlet_bound

N = 4096
for w in [witness_di_minus_ba(2.3), witness_di1_minus_di2(), witness_di2_minus_di1()]:
    x = w.as_expansion()
    digits = w.prefix(N)
    print(f"\n{w.label}: first digits {digits[:20]}")
    print(f"  inserted positions among {N}: {w.omega(N)}")
    print(f"  base recovered: {extract_base(digits, w.schedule)[:10]} ...")
    for p in (1.0, 2.0, 2.3):
        rep = scan(x, patterns_for(regime_of(p)), N)
        print(f"  p = {p}: verdict {classify(x, p, N).status}")
        for fam in rep.present_families():
            st = rep[fam]
            recs = [round(r, 2) for r in st.records[-4:]]
            print(f"    {fam}: last records {recs} at positions {st.record_positions[-4:]}")

# At the exponent it leaves, the witness pushes the Dirichlet constant onto the bound.
for w, p in [(witness_di1_minus_di2(), 2.0), (witness_di2_minus_di1(), 1.0)]:
    est = critical_times(w.as_expansion(), p, 1e6)
    print(f"{w.label} at p = {p}: d_estimate {est.d_estimate:.5f}, bound {dirichlet_bound(p):.5f}")
