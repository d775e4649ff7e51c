"""
Traveling waves: cuspons, stumpons, peakons
===========================================

Profiles are built from the first-order ODE by quadrature in the
arclength-like variable; nothing here integrates an ODE forward.
"""
# %%
from pathlib import Path

import numpy as np

from chwaves.helmholtz import p_closed_form_at, p_convolution, state_from_profile
from chwaves.plots import line_plot
from chwaves.profiles import GOLDEN, build_profile, cusp_exponent, cuspon_half_period, derive_params

out = Path(__file__).with_name("out")
out.mkdir(exist_ok=True)

# %% The golden cuspon: z = 1 - M and a = 1
p = derive_params(GOLDEN, 0.0, 1.0)
L = cuspon_half_period(p)
print(f"z = {p.z:.15f}, a = {p.a}, period 2L = {2 * L:.12f}")

cusp = build_profile(p)
print("cusp exponent near the crest:", round(cusp_exponent(cusp), 3))

# %% Gluing a plateau of half-width 2 - L gives period 4
sp = derive_params(GOLDEN, 0.0, 1.0, 2.0 - L, "stumpon-periodic")
stump = build_profile(sp)
print(f"stumpon period: {stump.period:.12f}")

# %% Periodic peakon with trough 1/cosh(1/2)
pk = build_profile(derive_params(1.0, 1 / np.cosh(0.5), 1.0, 0.0, "peakon-periodic"))

line_plot([("cuspon", cusp.xs, cusp.vals), ("stumpon", stump.xs, stump.vals), ("peakon", pk.xs, pk.vals)],
          out / "profiles.svg", xlabel="x - st", ylabel="u", title="one period of each family")

# %% The nonlocal term: the closed form against the Green's-function convolution
for n in (256, 1024, 4096):
    st = state_from_profile(cusp, n)
    err = np.max(np.abs(p_convolution(st) - p_closed_form_at(p, st.u)))
    print(f"n = {n:5d}  max |P_conv - P_closed| = {err:.2e}")
