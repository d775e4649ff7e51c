"""
How a stumpon plateau starts to move
====================================

The plateau is flat, so U_t = -Q vanishes there at t = 0. The second derivative
-Q_t does not: the plateau bends immediately, with a cosh shape.
"""
# %%
import numpy as np

from chwaves.analysis import conservation_jump
from chwaves.evolution import (SimConfig, cfl_dt, plateau_limit_check, plateau_taylor_check,
                               q_time_derivative, qt_closed_form_plateau, simulate)
from chwaves.helmholtz import state_from_profile
from chwaves.lagrangian import to_lagrangian
from chwaves.profiles import GOLDEN, build_profile, cuspon_half_period, derive_params

L = cuspon_half_period(derive_params(GOLDEN, 0.0, 1.0))
p = derive_params(GOLDEN, 0.0, 1.0, 2.0 - L, "stumpon-periodic")
prof = build_profile(p)
ls = to_lagrangian(state_from_profile(prof, 2048), 512)

# %% The energy flux jumps by (M - s)(s - m)(s - z) at each gluing line
print("flux jump:", conservation_jump(prof).jump_value)

# %% Numerical Q_t against the closed form across the plateau
for y in (0.0, 0.1, 0.2):
    xi = y * (1 + p.s ** 2)
    print(f"y = {y:.1f}  numeric {q_time_derivative(ls, xi):.6f}  closed {qt_closed_form_plateau(p, ls, xi):.6f}")

# %% The Taylor picture U(t) - s ~ -t^2 Q_t / 2 holds to third order
tr = simulate(ls, SimConfig(dt=cfl_dt(ls, 0.3), T=0.2, n_labels=512, snapshot_stride=10 ** 6),
              snapshot_times=[0.02 * k for k in range(1, 11)])
rep = plateau_taylor_check(tr, p)
print("max |dev| / t^3 =", f"{rep.C:.2e}")

# %% Long periods approach the decaying stumpon, with exponentially small gaps
for row in plateau_limit_check():
    print(f"L_phi = {row['Lphi']:4.0f}  gap m - z = {row['gap']:.1e}  rel = {row['rel']:.1e}")
print("log gaps:", np.log([r["gap"] for r in plateau_limit_check()]).round(1))
