# %% [markdown]
# # The mismatch function
#
# `xi(c)` measures how far the interface heat balance is from closing.  It is
# negative at the fast end of the bracket (surface at the flame temperature),
# positive at the slow end, and increases monotonically in between, which is
# what makes the eigenvalue unique.  The heat-capacity ratio changes the
# convective term of the gas equation and the flame temperature, so it is a
# good stress test for that structure.

# %%
from pathlib import Path

import numpy as np

from propwave import reference_params
from propwave.model import nondimensionalize
from propwave.shooting import xi_scan
from propwave.svgplot import Series, line_plot

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)
base = reference_params()

# %%
series = []
for r in (0.5, 1.0, 2.0, 3.0):
    problem = nondimensionalize(base.with_(c_p=r * base.c_s))
    scan = xi_scan(problem, n=200)
    print(f"c_p/c_s = {r:3.1f}: increasing = {scan.strictly_increasing}, "
          f"sign changes = {scan.sign_changes}, xi(0) = {scan.xi_zero:.6f}")
    series.append(Series(scan.theta_s, scan.xi / scan.xi_zero, f"c_p/c_s = {r:g}"))

# %% [markdown]
# Normalised by its cold limit `xi(0) = sqrt(2 I0)`, each curve crosses zero
# once.  The horizontal axis is the surface temperature that the pyrolysis
# law attaches to each `c`.

# %%
line_plot(out / "xi_curves.svg", series, xlabel="theta_s", ylabel="xi / xi(0)",
          title="Mismatch across the bracket")
