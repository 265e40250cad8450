# %% [markdown]
# # Limit densities of critical values
#
# For a random section of a high power of a positive line bundle, the critical
# values of |s|_h, collected over the surface and divided by the degree n,
# settle on universal profiles.  Saddles carry mass 4/3 and local maxima 1/3.

# %%
import numpy as np
from scipy import integrate

from cvlab import densities as D

xs = np.linspace(0.0, 2.5, 11)
for x in xs:
    print(f"x={x:4.2f}  saddle={D.dens_saddle_limit(x):.5f}  max={D.dens_max_limit(x):.5f}")

# %% [markdown]
# The "count" convention integrates to the expected number of critical points per
# unit degree.  The "paper" convention differs by the constant pi^3.

# %%
sad = integrate.quad(D.dens_saddle_limit, 0, np.inf)[0]
mx = integrate.quad(D.dens_max_limit, 0, np.inf)[0]
print("saddle mass", sad, "max mass", mx, "ratio", sad / mx)
print("count/paper at x=1:", D.dens_max_limit(1.0, "count") / D.dens_max_limit(1.0, "paper"))

# %% [markdown]
# Near zero the maxima profile is extremely flat (order x^5) while saddles rise
# linearly, so small critical values are almost always saddles.

# %%
for x in (1e-1, 1e-2):
    print(x, D.dens_saddle_limit(x) / x, D.dens_max_limit(x) / x**5)
