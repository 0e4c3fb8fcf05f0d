"""Finite-volume reference solver for the steady travelling wave."""

from .core import Layout, Sources, residual
from .mesh import FvMesh, equidistributed_mesh, geometric_mesh, refine_mesh
from .newton import FvOptions, FvState, FvSystem, newton_solve, pseudo_transient
from .solver import (FvProfiles, FvSolution, domain_lengths, enthalpy_deviation, initial_from_wave,
                     initial_guess, interpolate_state, pressure_drop_diagnostic,
                     reaction_integral_fv, solve_fv, solve_on_mesh)

__all__ = [
    "FvMesh", "FvOptions", "FvProfiles", "FvSolution", "FvState", "FvSystem", "Layout", "Sources",
    "domain_lengths", "enthalpy_deviation", "equidistributed_mesh", "geometric_mesh",
    "initial_from_wave", "initial_guess", "interpolate_state", "newton_solve",
    "pressure_drop_diagnostic", "pseudo_transient", "reaction_integral_fv", "refine_mesh",
    "residual", "solve_fv", "solve_on_mesh",
]
