"""
Badly approximable numbers containing prescribed words
======================================================

BA_W(eps) alternates free blocks of digits in [1, M] with the words of
W.  The block lengths nu_t are chosen so that the free digits pay for
each word: the running product of the factors F(n) returns to 1 at the
end of every period and stays above it afterwards.
"""

from lpdirichlet.classifier import classify
from lpdirichlet.constructors import ba_w, good_condition_check
from lpdirichlet.lp import INF

params, stream = ba_w(0.5, [(2, 3)], seed=1)
print(f"M = {params.M}, Q = {params.Q}, nu = {params.nu}")
for key, value in params.chain[0].items():
    print(f"  {key}: {value}")

print("first period:", stream.prefix(sum(params.nu) + 2))

rep = good_condition_check(0.5, [(2, 3)], 200)
print(f"running product stays >= 1 from n = {rep.stays_from}; period length {rep.period_length}")
print("product at period ends:", [round(rep.running[k * rep.period_length - 1], 12) for k in (1, 2, 3)])

for eps in (0.5, 0.2, 0.05):
    params, _ = ba_w(eps, [(2, 3), (1, 1, 4)])
    print(f"eps = {eps}: M = {params.M}, nu = {params.nu}")

print("sup-norm verdict:", classify(stream.as_expansion(), INF).status)
