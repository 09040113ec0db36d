# %% [markdown]
# # Bernstein-Vazirani as a sampler
#
# One BV run on `f` measures `y` with probability `W_f(y)^2 / 4^k`. For a
# linear `f(x) = a.x` that law is a point mass at `a`; for anything else it
# spreads over the spectrum's support and never leaves it.

# %%
import numpy as np

from bvkey import BooleanFunction, RngStream, bv_exact_distribution, bv_sample
from bvkey.boolfn import support

# %%
lin = BooleanFunction.linear(5, 0b10110)
print("linear:", set(bv_sample(lin, RngStream(1), size=1000).tolist()))

# %%
rng = np.random.default_rng(2)
f = BooleanFunction(6, rng.integers(0, 2, 64))
exact = bv_exact_distribution(f)
ys = bv_sample(f, RngStream(2), size=100_000)
emp = np.bincount(ys, minlength=64) / ys.size
print("support size", support(f).size, "of 64")
print("total variation %.4f" % (0.5 * np.abs(emp - exact.probabilities()).sum()))
print("all samples in support:", bool(np.isin(ys, support(f)).all()))

# %% [markdown]
# Streams are addressed by path, so a sample sequence can be reproduced
# from `(master seed, trial, component)` alone.

# %%
a = bv_sample(f, RngStream(7, (3, 1)), size=5)
b = bv_sample(f, RngStream(7).child(3).child(1), size=5)
print(a, b)
