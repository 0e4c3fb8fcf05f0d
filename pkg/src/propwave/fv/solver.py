"""Adaptive finite-volume reference solve: initial data, solve/refine loop, diagnostics."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConvergenceError
from ..model import (PhysicalParams, derive, flame_temperature, gas_density, nondimensionalize,
                     pyrolysis_mass_flux, _omega)
from ..shooting import WaveSolution, critical_slope
from .core import Sources
from .mesh import FvMesh, equidistributed_mesh, geometric_mesh, refine_mesh
from .newton import FvOptions, FvState, FvSystem, newton_solve, pseudo_transient

log = logging.getLogger(__name__)


@dataclass
class FvProfiles:
    x: np.ndarray
    T: np.ndarray
    Y: np.ndarray
    u: np.ndarray
    rho: np.ndarray
    gas: np.ndarray
    u_surface: float = 0.0      # gas velocity at the interface, c + mdot / rho(T_s)

    def columns(self) -> dict:
        return {"x": self.x, "T": self.T, "Y": self.Y, "u": self.u, "rho": self.rho}


@dataclass
class FvSolution:
    c: float
    T_s: float
    mass_flux: float
    state: FvState
    mesh: FvMesh
    params: PhysicalParams
    options: FvOptions
    profiles: FvProfiles
    history: list = field(default_factory=list)
    converged: bool = True
    wall_time: float = 0.0

    @property
    def n_cells(self) -> int:
        return self.mesh.n_cells

    def meta(self) -> dict:
        st = self.state
        return {
            "solver": "fv",
            "c": self.c,
            "T_s": self.T_s,
            "mass_flux": self.mass_flux,
            "n_cells": self.n_cells,
            "n_solid": self.mesh.n_solid,
            "residual_max": float(np.max(np.abs(st.residual))) if st.residual is not None else None,
            "step_norms": [float(v) for v in st.step_norms],
            "scheme": self.options.scheme,
            "newton_tol": self.options.newton_tol,
            "refine_dT": self.options.refine_dT,
            "rounds": self.history,
        }


# -- initial data ----------------------------------------------------------------

def domain_lengths(params: PhysicalParams, c: float, factor: float) -> tuple[float, float]:
    """Solid and gas half-lengths covering ``factor`` decay lengths on each side."""
    mdot = -params.rho_s * c
    d_solid = params.lambda_s / (mdot * params.c_s)
    d_gas = params.lambda_g / (mdot * params.c_p)
    problem = nondimensionalize(params)
    alpha = critical_slope(problem.c_tilde(c), problem)
    d_tail = params.L_ref / abs(alpha)
    d_species = d_gas * max(1.0, params.Le)
    return factor * d_solid, factor * max(d_gas, d_tail, d_species)


def _state_from_profile(mesh: FvMesh, x, T, Y, gas, T_s, c) -> FvState:
    xc = mesh.centers
    ns = mesh.n_solid
    xs, Ts_ = x[~gas], T[~gas]
    xg, Tg_, Yg_ = x[gas], T[gas], Y[gas]
    o = np.argsort(xs)
    xs_, Tsv = np.concatenate([xs[o], [0.0]]), np.concatenate([Ts_[o], [T_s]])
    o = np.argsort(xg)
    xg, Tg_, Yg_ = xg[o], Tg_[o], Yg_[o]
    Tc = np.empty(mesh.n_cells)
    Tc[:ns] = np.interp(xc[:ns], xs_, Tsv)
    Tc[ns:] = np.interp(xc[ns:], xg, Tg_)
    Yc = np.interp(xc[ns:], xg, Yg_)
    return FvState(mesh, Tc, Yc, float(T_s), float(c))


def initial_from_wave(wave: WaveSolution, params: PhysicalParams, options: FvOptions):
    """Temperature-equidistributed mesh and interpolated state from a shooter solution.

    ``params`` may differ from the shooter's (e.g. Le != 1); the shooter
    profile is then only an initial guess.
    """
    prof = wave.profiles
    if prof is None:
        raise ConvergenceError("initial WaveSolution carries no profiles")
    Ls, Lg = domain_lengths(params, wave.c, options.domain_factor)
    mesh = equidistributed_mesh(prof.x, prof.T, options.init_dT, Ls, Lg,
                                max_cells=options.max_cells)
    state = _state_from_profile(mesh, prof.x, prof.T, prof.Y, prof.gas, wave.T_s, wave.c)
    return mesh, state


def initial_guess(params: PhysicalParams, options: FvOptions, T_s: float | None = None,
                  theta_guess: float = 0.2, theta_domain: float = 0.1):
    """Crude exponential/tanh guess on a geometric mesh (no shooter information).

    The domain is sized from the slower wave at ``theta_domain`` so that a
    flame thicker than guessed still fits; a too-short gas side lets the
    pseudo-time march blow the flame out of the domain.
    """
    d = derive(params)
    T_f = d.T_f
    dT = T_f - params.T0
    th_min = d.theta_s_min if d.theta_s_min is not None else 0.0
    if T_s is None:
        T_s = params.T0 + max(theta_guess, 1.05 * th_min) * dT
    c = -pyrolysis_mass_flux(T_s, params) / params.rho_s
    T_dom = min(T_s, params.T0 + max(theta_domain, 1.02 * th_min) * dT)
    c_dom = -pyrolysis_mass_flux(T_dom, params) / params.rho_s
    Ls, Lg = domain_lengths(params, c_dom, options.domain_factor)
    ds_g, dg_g = domain_lengths(params, c, 1.0)
    d_solid, d_gas = ds_g, dg_g
    mesh = geometric_mesh(Ls, Lg, options.coarse_width * min(d_solid, d_gas), ratio=1.15)
    xc = mesh.centers
    ns = mesh.n_solid
    T = np.empty(mesh.n_cells)
    T[:ns] = params.T0 + (T_s - params.T0) * np.exp(xc[:ns] / d_solid)
    T[ns:] = T_s + (T_f - T_s) * np.tanh(xc[ns:] / d_gas)
    Y = np.clip(params.c_p * (T_f - T[ns:]) / params.Q_g, 0.0, 1.0)
    return mesh, FvState(mesh, T, Y, float(T_s), float(c))


def interpolate_state(state: FvState, mesh: FvMesh) -> FvState:
    old = state.mesh
    xo = old.centers
    ns = old.n_solid
    x = np.concatenate([xo[:ns], [0.0], xo[ns:]])
    T = np.concatenate([state.T[:ns], [state.T_s], state.T[ns:]])
    xn = mesh.centers
    Tn = np.interp(xn, x, T)
    Yn = np.interp(xn[mesh.n_solid:], xo[ns:], state.Y)
    return FvState(mesh, Tn, Yn, state.T_s, state.c)


def remesh_equidistributed(state: FvState, params: PhysicalParams, options: FvOptions) -> FvMesh:
    """Fresh equidistributed mesh built on a converged (coarse) solution."""
    mesh = state.mesh
    ns = mesh.n_solid
    xc = mesh.centers
    x = np.concatenate([[mesh.faces[0]], xc[:ns], [0.0], xc[ns:], [mesh.faces[-1]]])
    T = np.concatenate([[params.T0], state.T[:ns], [state.T_s], state.T[ns:], [state.T[-1]]])
    Ls, Lg = domain_lengths(params, state.c, options.domain_factor)
    return equidistributed_mesh(x, T, options.init_dT, max(Ls, mesh.solid_length),
                                max(Lg, mesh.gas_length), max_cells=options.max_cells)


# -- driver ------------------------------------------------------------------------

def solve_on_mesh(state0: FvState, params: PhysicalParams, options: FvOptions,
                  sources: Sources | None = None) -> FvState:
    """Newton from ``state0``; pseudo-transient continuation when Newton fails."""
    st = newton_solve(state0, state0.mesh, params, options, sources)
    if st.converged:
        return st
    log.info("newton failed (%s); switching to pseudo-transient", st.message)
    st2 = pseudo_transient(state0, state0.mesh, params, options, sources)
    if not st2.converged:
        st2.message = f"newton: {st.message}; pseudo-transient: {st2.message}"
    return st2


def solve_fv(params: PhysicalParams, options: FvOptions = FvOptions(),
             initial: WaveSolution | None = None, refine: bool = True) -> FvSolution:
    """Solve, refine, repeat until the refinement criteria leave the mesh unchanged."""
    t0 = time.perf_counter()
    if initial is not None:
        mesh, state = initial_from_wave(initial, params, options)
    else:
        mesh, state = initial_guess(params, options)
    history = []
    for rnd in range(options.max_rounds + 1):
        st = solve_on_mesh(state, params, options)
        history.append({"round": rnd, "n_cells": mesh.n_cells, "c": st.c, "T_s": st.T_s,
                        "newton_iterations": len(st.step_norms), "pseudo_steps": st.n_pseudo,
                        "converged": st.converged, "message": st.message})
        if not st.converged:
            raise ConvergenceError(f"FV solve failed on round {rnd}: {st.message}", history)
        if not refine:
            break
        if rnd == 0 and initial is None:
            new_mesh = remesh_equidistributed(st, params, options)
        else:
            new_mesh = refine_mesh(st, mesh, options)
        if new_mesh is mesh:
            break
        mesh = new_mesh
        state = interpolate_state(st, mesh)
        state.step_norms, state.damping = [], []
    else:
        raise ConvergenceError(f"refinement did not settle in {options.max_rounds} rounds", history)
    return _finish(st, params, options, history, time.perf_counter() - t0)


def _finish(st: FvState, params, options, history, wall) -> FvSolution:
    mesh = st.mesh
    ns = mesh.n_solid
    mdot = -params.rho_s * st.c
    xc = mesh.centers
    gas = np.arange(mesh.n_cells) >= ns
    Y = np.ones(mesh.n_cells)
    Y[ns:] = st.Y
    rho = np.full(mesh.n_cells, params.rho_s)
    rho[ns:] = gas_density(st.T[ns:], params)
    u = np.zeros(mesh.n_cells)
    u[ns:] = st.c + mdot / rho[ns:]
    u_s = st.c + mdot / gas_density(st.T_s, params)
    prof = FvProfiles(x=xc, T=st.T.copy(), Y=Y, u=u, rho=rho, gas=gas, u_surface=u_s)
    return FvSolution(c=st.c, T_s=st.T_s, mass_flux=mdot, state=st, mesh=mesh, params=params,
                      options=options, profiles=prof, history=history, wall_time=wall)


# -- diagnostics -------------------------------------------------------------------

def pressure_drop_diagnostic(solution: FvSolution) -> float:
    """-mdot (u_far - u_surface) [Pa] from the stored velocity profile."""
    mdot = solution.mass_flux
    if mdot == 0:
        return 0.0
    return -mdot * (solution.profiles.u[-1] - solution.profiles.u_surface)


def reaction_integral_fv(solution: FvSolution) -> float:
    """Sum of omega dx over gas cells [mol m^-2 s^-1]."""
    ns = solution.mesh.n_solid
    w = _omega(solution.state.T[ns:], solution.state.Y, solution.params)
    return float(np.sum(w * solution.mesh.widths[ns:]))


def enthalpy_deviation(solution: FvSolution) -> float:
    """max |Q_g Y + c_p (T - T_f)| / (c_p (T_f - T0)) over gas cells."""
    p = solution.params
    T_f = flame_temperature(p)
    ns = solution.mesh.n_solid
    h = p.Q_g * solution.state.Y + p.c_p * (solution.state.T[ns:] - T_f)
    return float(np.max(np.abs(h)) / (p.c_p * (T_f - p.T0)))


def residual_parts(solution: FvSolution, sources: Sources | None = None) -> dict:
    sysm = FvSystem(solution.mesh, solution.params, solution.options, sources)
    from .core import residual
    x = sysm.pack(solution.state)
    return residual(x, sysm.geom, sysm.layout, solution.params, solution.options.scheme,
                    sysm.scales, sources, parts=True)


def write_meta(path, meta: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
