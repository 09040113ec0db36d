# %% [markdown]
# # When does the attack stay small?
#
# A non-structure `a` survives one BV sample with probability equal to its
# best agreement fraction, so it survives `p` samples with probability at
# most `delta^p`. We measure `delta` exactly and then watch the worst
# non-structure's survival rate track `delta^p`.

# %%
from fractions import Fraction

from bvkey import AttackConfig, RngStream, derived_f, find_struct, toy_em, toy_spn
from bvkey.attack import check_condition1, check_condition2, theorem2_bound, theorem3_bound
from bvkey.boolfn import agreement_counts, exact_linear_structures

for name, E in [("toy_em", toy_em(8, seed=1)), ("toy_spn", toy_spn(3))]:
    c1 = check_condition1(E, 0x5A, 0)
    c2 = check_condition2(E, 0x5A, 0, 16)
    print(f"{name:8s} delta={c1.delta} ({float(c1.delta):.3f})  1/16-close counts={c2.counts}")

# %%
E = toy_em(8, seed=1)
F = derived_f(E, 0x5A, 0)
f = F.component(0)
U = set(exact_linear_structures(f).all.tolist())
counts = agreement_counts(f)
a, i = max(((a, i) for a in range(256) if a not in U for i in (0, 1)), key=lambda c: counts[c])
frac = Fraction(int(counts[a, i]), 256)
for p in (4, 8, 12):
    hits = sum(a in find_struct(F, AttackConfig(p=p), RngStream(p, (t,))).systems[0][i]
               for t in range(2000))
    print(f"p={p:2d}: worst non-structure kept {hits / 2000:.3f}, frac^p = {float(frac) ** p:.3f}, "
          f"1 - theorem3 bound = {1 - theorem3_bound(0.75, p):.3f}")

# %%
print("closeness bound at l=8, n=8, p=512:", theorem2_bound(512, 1 / 8, 8))
