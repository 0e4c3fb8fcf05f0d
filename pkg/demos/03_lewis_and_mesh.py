# %% [markdown]
# # Mesh convergence and Lewis-number effects
#
# The finite-volume solver is second order on meshes that equidistribute the
# temperature jump per cell.  Once its accuracy is established, it can
# measure what the unit-Lewis shooting model misses when species diffuse
# faster or slower than heat.

# %%
from pathlib import Path

import numpy as np

from propwave import reference_params, solve_wave
from propwave.fv import FvOptions, initial_from_wave, solve_fv, solve_on_mesh
from propwave.svgplot import Series, line_plot

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)
params = reference_params()
wave = solve_wave(params)

# %% [markdown]
# ## Equidistributed mesh family
#
# Each mesh keeps the temperature change per cell below a threshold.  The
# surface-temperature error against the shooting result falls as `N^-2`.

# %%
cells, errs = [], []
for thr in (50, 20, 10, 5, 2, 1, 0.5, 0.2, 0.1, 0.05):
    opts = FvOptions(init_dT=thr)
    mesh, state = initial_from_wave(wave, params, opts)
    st = solve_on_mesh(state, params, opts)
    cells.append(mesh.n_cells)
    errs.append(abs(st.T_s - wave.T_s) / wave.T_s)
    print(f"dT = {thr:5.2f} K: {mesh.n_cells:6d} cells, T_s error {errs[-1]:.2e}")
order = -np.polyfit(np.log(cells), np.log(errs), 1)[0]
print(f"observed order {order:.2f}")
line_plot(out / "mesh_convergence.svg", [Series(cells, errs, "hybrid", markers=True)],
          xlabel="cells", ylabel="relative T_s error", logx=True, logy=True)

# %% [markdown]
# ## Lewis numbers
#
# The shooting model assumes `Le = 1`.  Against the finite-volume reference
# it overestimates the speed for `Le < 1` and underestimates it above.

# %%
les = (0.5, 1.0, 2.0, 3.0)
err_c = []
for le in les:
    sol = solve_fv(params.with_(Le=le), FvOptions(), initial=wave)
    err_c.append((wave.c - sol.c) / sol.c)
    print(f"Le = {le:3.1f}: c_fv = {sol.c:.6e}, shooter error {err_c[-1]:+.2%}, "
          f"T_s error {(wave.T_s - sol.T_s) / sol.T_s:+.2%}")
line_plot(out / "lewis_error.svg", [Series(les, np.abs(err_c), "|error in c|", markers=True)],
          xlabel="Le", ylabel="relative error")
