# %% [markdown]
# # The reference travelling wave
#
# A burning propellant surface recedes at a constant speed `c` (negative: the
# wave moves towards the cold solid).  With a unit Lewis number the gas phase
# collapses to one first-order ODE for the temperature gradient `gamma` as a
# function of the reduced temperature `theta`, so the eigenvalue `c` can be
# found by shooting: integrate the orbit from the burnt state down to the
# surface and adjust `c` until the interface heat balance closes.

# %%
from pathlib import Path

import numpy as np

from propwave import reference_params, solve_wave
from propwave.fv import FvOptions, solve_fv
from propwave.model import derive
from propwave.svgplot import Series, line_plot

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)

params = reference_params()
d = derive(params)
print(f"T_f = {d.T_f:.2f} K, theta_s,min = {d.theta_s_min:.4f}")
print(f"bracket for c: ({d.c_max:.4e}, {d.c_min:.4e}) m/s")

# %% [markdown]
# ## Shooting
#
# Brent's method works on the mismatch `xi(c)` inside the bracket above.  The
# bracket width at exit is a few ulps of `c`.

# %%
wave = solve_wave(params)
print(f"c = {wave.c:.12e} m/s, T_s = {wave.T_s:.6f} K")
print(f"{wave.iterations} Brent iterations, bracket width {wave.bracket_width:.1e}")

# %% [markdown]
# ## Phase portrait and spatial profiles
#
# In the solid the orbit is the straight line `gamma = -c~ theta`; in the gas
# it leaves the burnt state with the critical slope and ends at `theta_s`.
# The spatial profile follows from `x = int dtheta / gamma`.

# %%
prof = wave.profiles
line_plot(out / "portrait.svg",
          [Series(prof.theta[~prof.gas], prof.gamma[~prof.gas], "solid"),
           Series(prof.theta[prof.gas], prof.gamma[prof.gas], "gas")],
          xlabel="theta", ylabel="gamma", title="Phase portrait")
mm = prof.x * 1e3
line_plot(out / "temperature.svg", [Series(mm, prof.T, "T")],
          xlabel="x [mm]", ylabel="T [K]", title="Temperature")
line_plot(out / "mass_fraction.svg", [Series(mm[prof.gas], prof.Y[prof.gas], "Y")],
          xlabel="x [mm]", ylabel="Y", title="Reactant mass fraction")

# %% [markdown]
# ## Cross-check with the finite-volume solver
#
# The finite-volume solver discretises the full two-equation system with `c`
# as an extra unknown.  Started from the shooting profile it converges in a
# couple of Newton iterations; the agreement is set by the mesh threshold.

# %%
fv = solve_fv(params, FvOptions(), initial=wave)
print(f"FV: c = {fv.c:.12e} m/s on {fv.n_cells} cells")
print(f"relative difference {abs(fv.c - wave.c) / abs(fv.c):.2e}")
