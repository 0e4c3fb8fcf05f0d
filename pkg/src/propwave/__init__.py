"""Travelling-wave eigenvalue problem of one-dimensional solid-propellant combustion."""

from .errors import (BracketError, ConfigurationError, ConvergenceError, DomainError,
                     IntegrationError, ModelError, PropwaveError)
from .model import (Cutoff, DerivedQuantities, DimensionlessProblem, PhysicalParams,
                    flame_temperature, gas_density, load_params, mass_fraction_of_theta,
                    nondimensionalize, params_from_dict, psi, pyrolysis_mass_flux, q_pyro,
                    reaction_rate, reference_params, surface_temperature_from_c, target_S)
from .shooting import ShootOptions, WaveSolution, solve_constant_ts, solve_wave
from .fv import FvOptions, FvSolution, solve_fv

__version__ = "0.1.0"
