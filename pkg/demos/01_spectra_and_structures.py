# %% [markdown]
# # Walsh spectra and linear structures
#
# A vector `a` is a linear structure of `f` when `f(x ^ a) ^ f(x)` does not
# depend on `x`. Such vectors are exactly the ones orthogonal (with a fixed
# parity) to every point of the spectrum's support, so the spectrum alone
# tells us where they live.

# %%
import numpy as np

from bvkey import BooleanFunction, VectorFunction, walsh_spectrum
from bvkey.boolfn import delta_f, exact_linear_structures, sigma_close_structures, support

# %% [markdown]
# Two-bit AND has a flat spectrum, so only the zero vector is a structure.

# %%
AND = BooleanFunction(2, [0, 0, 0, 1])
print("spectrum", walsh_spectrum(AND).coeffs)
print("support ", support(AND))
S = exact_linear_structures(AND)
print("U^0", S.u0, "U^1", S.u1)

# %% [markdown]
# Every nonzero shift of AND agrees with the original on exactly half the
# inputs, which is the worst bias among non-structures.

# %%
print("delta =", delta_f(AND))
for a, i, frac in sigma_close_structures(AND, 0.6):
    print(f"a={a:02b} i={i} agreement={frac}")

# %% [markdown]
# A function built as `h(top bits) ^ linear part` has a whole subspace of
# structures. The two routes (spectrum and direct scan) agree.

# %%
rng = np.random.default_rng(0)
k = 6
hidden = rng.integers(0, 2, 1 << (k - 2))
table = np.array([hidden[x >> 2] ^ (x & 1) for x in range(1 << k)])
f = BooleanFunction(k, table)
via_spectrum = exact_linear_structures(f, "spectrum")
scan = exact_linear_structures(f, "scan")
print("U^0", via_spectrum.u0, "U^1", via_spectrum.u1)
assert via_spectrum.u0.tolist() == scan.u0.tolist() and via_spectrum.u1.tolist() == scan.u1.tolist()
