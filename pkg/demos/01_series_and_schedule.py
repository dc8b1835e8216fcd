"""
Series bookkeeping and the run schedule
=======================================

Every operator in the corrected Taylor method is a power series in the one
operator X = -iH, so most of the algebra happens on coefficient arrays.
This walk-through builds the schedule for a small instance and looks at
the series behind it.
"""

# %%
import math

import numpy as np

from taylorsim.series import (
    exp_tail,
    majorant,
    make_plan,
    w_series,
    w_series_crosscheck,
)

np.set_printoptions(precision=4, suppress=False, linewidth=100)

# %% [markdown]
# A Hamiltonian with total weight A = 1 evolved for t = 1 (so T = A t = 1).
# The segment stage only has to reach delta = 0.49; the correction brings the
# error down to epsilon.

# %%
plan, series = make_plan(t=1.0, A=1.0, epsilon=1e-8, delta=0.49)
print(f"r={plan.r}  K={plan.K}  Q={plan.Q}  theta={plan.theta}")
print(f"s = {plan.s:.6f}   s_C = {plan.s_C:.6f}   2^(r-Q-1) = {plan.truncation_bound:.3e}")

# %% [markdown]
# With r = 5 segments each segment covers theta = 0.2, and K = 2 is already
# enough: the discarded tail of exp(0.2) is about 1.4e-3, well inside delta/r.

# %%
print("tail at K=2:", exp_tail(plan.T / plan.r, plan.K), " budget:", plan.delta / plan.r)

# %% [markdown]
# The distortion of one segment, W, starts at order K+1.  Three different
# constructions agree to rounding.

# %%
eight, definitional = w_series_crosscheck(series.V, series.Vt, series.Delta)
from_vd = w_series(series.VDelta)
print("first W coefficients:", from_vd.coeffs[:6].real)
print("max disagreement:", max(np.max(np.abs(from_vd.coeffs - eight.coeffs)),
                               np.max(np.abs(from_vd.coeffs - definitional.coeffs))))

# %% [markdown]
# The correction coefficients a_k decay roughly like 2^-k, which is what makes
# Q = r + log2(1/epsilon) orders sufficient.

# %%
a = np.abs(series.a.coeffs)
for k in (0, 3, 6, 10, 20, 31):
    print(f"|a_{k:<2}| = {a[k]:.3e}   2^(r-k) = {2.0 ** (plan.r - k):.3e}")

# %% [markdown]
# Majorants evaluated at 2A: the quantities the error analysis bounds.

# %%
y = 2 * plan.A
print("V_Delta+(2) =", majorant(series.VDelta, y), "<=", math.e - 2.5)
print("W+(2)       =", majorant(series.W, y))
print("V_C+(2)     =", majorant(series.a_long, y), "<= 2^r =", 2**plan.r)
