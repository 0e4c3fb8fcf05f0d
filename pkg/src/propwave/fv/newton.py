"""Damped Newton and pseudo-transient continuation on the augmented FV system."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..errors import ConfigurationError
from ..model import PhysicalParams, flame_temperature
from .core import (Geometry, Layout, Scales, Sources, fd_jacobian, jacobian_pattern,
                   mass_matrix, perturbation, residual)
from .mesh import FvMesh

log = logging.getLogger(__name__)

SCHEMES = ("upwind", "hybrid", "centred")


@dataclass(frozen=True)
class FvOptions:
    """Solver, pseudo-time and refinement settings.

    Refinement thresholds are per cell pair: ``refine_dT`` in K, ``refine_dY``
    absolute (None derives it from ``refine_dT`` and the temperature span),
    ``refine_curv`` as a fraction of the slope range (None disables it).
    """

    scheme: str = "hybrid"
    newton_tol: float = 1e-8
    max_newton: int = 40
    damping_min: float = 2.0 ** -10
    pt_dt0: float = 1e-6
    pt_growth: float = 2.0
    pt_max_steps: int = 400
    pt_switch_tol: float = 1e-2
    pt_newton_iter: int = 6
    pt_solid_capacity: float = 0.0
    init_dT: float = 0.8
    refine_dT: float = 1.0
    refine_dY: float | None = None
    refine_curv: float | None = None
    max_ratio: float = 2.0
    extend_tol: float = 1e-6
    extend_ratio: float = 1.3
    max_cells: int = 400_000
    max_rounds: int = 8
    domain_factor: float = 40.0
    coarse_width: float = 0.05

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"scheme must be one of {SCHEMES}", "scheme")
        for name in ("newton_tol", "damping_min", "pt_dt0", "pt_growth", "pt_switch_tol",
                     "init_dT", "refine_dT", "max_ratio", "extend_tol", "extend_ratio",
                     "domain_factor", "coarse_width"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ConfigurationError(f"{name} must be positive", name)
        if self.refine_dY is not None and not self.refine_dY > 0:
            raise ConfigurationError("refine_dY must be positive", "refine_dY")
        if self.refine_curv is not None and not self.refine_curv > 0:
            raise ConfigurationError("refine_curv must be positive", "refine_curv")
        if self.max_ratio <= 1 or self.pt_growth <= 1 or self.extend_ratio <= 1:
            raise ConfigurationError("ratios must exceed 1", "max_ratio")
        if not (np.isfinite(self.pt_solid_capacity) and self.pt_solid_capacity >= 0):
            raise ConfigurationError("pt_solid_capacity must be non-negative", "pt_solid_capacity")
        if self.damping_min >= 1:
            raise ConfigurationError("damping_min must be below 1", "damping_min")

    def with_(self, **kw) -> "FvOptions":
        from dataclasses import replace
        return replace(self, **kw)


@dataclass
class FvState:
    mesh: FvMesh
    T: np.ndarray            # all cells
    Y: np.ndarray            # gas cells
    T_s: float
    c: float
    residual: np.ndarray | None = None
    step_norms: list = field(default_factory=list)
    damping: list = field(default_factory=list)
    converged: bool = False
    message: str = ""
    n_pseudo: int = 0


class FvSystem:
    """Residual, Jacobian and norms for one mesh."""

    def __init__(self, mesh: FvMesh, params: PhysicalParams, options: FvOptions,
                 sources: Sources | None = None):
        self.mesh = mesh
        self.params = params
        self.options = options
        self.sources = sources
        self.geom = Geometry.of(mesh)
        self.layout = Layout.of(mesh)
        self.scales = Scales.of(params)
        self.pattern = jacobian_pattern(self.layout)
        self.T_ref = flame_temperature(params)
        lay = self.layout
        w = np.ones(lay.n)
        w[:lay.ns] = 1.0 / self.T_ref
        w[lay.iTs] = 1.0 / self.T_ref
        w[lay.iTg] = 1.0 / self.T_ref
        self._w = w

    def F(self, x):
        return residual(x, self.geom, self.layout, self.params, self.options.scheme,
                        self.scales, self.sources)

    def J(self, x, f0=None):
        f0 = self.F(x) if f0 is None else f0
        d = perturbation(x, self.layout, self.params)
        return fd_jacobian(self.F, x, f0, self.pattern, d)

    def mass(self, x):
        m = mass_matrix(x, self.geom, self.layout, self.params, self.scales)
        # a quasi-steady solid keeps the march clear of the intrinsic burning instability
        m[:self.layout.ns] *= self.options.pt_solid_capacity
        return m

    def norm(self, dx, x):
        w = self._w.copy()
        w[self.layout.ic] = 1.0 / max(abs(x[self.layout.ic]), 1e-300)
        return float(np.max(np.abs(dx * w)))

    def admissible(self, x):
        lay = self.layout
        if not np.all(np.isfinite(x)):
            return False
        T = np.concatenate([x[:lay.ns], [x[lay.iTs]], x[lay.iTg]])
        return bool(np.all(T > 0) and x[lay.ic] < 0)

    def pack(self, state: FvState):
        return self.layout.pack(state.T, state.Y, state.T_s, state.c)

    def to_state(self, x, **kw) -> FvState:
        T, Y, T_s, c = self.layout.unpack(x)
        return FvState(self.mesh, T, Y, T_s, c, **kw)


def _factor(J):
    try:
        return splu(sp.csc_matrix(J))
    except RuntimeError:
        return None


def newton_solve(state0: FvState, mesh: FvMesh, params: PhysicalParams,
                 options: FvOptions = FvOptions(), sources: Sources | None = None,
                 system: FvSystem | None = None) -> FvState:
    """Damped Newton with the Smooke acceptance test.

    A trial x + lam*dx is accepted when the Newton step computed there (with
    the current Jacobian) is shorter than dx; lam is halved otherwise down to
    ``options.damping_min``.
    """
    sysm = system or FvSystem(mesh, params, options, sources)
    x = sysm.pack(state0)
    norms, damps = list(state0.step_norms), list(state0.damping)
    if not sysm.admissible(x):
        return sysm.to_state(x, step_norms=norms, damping=damps, message="inadmissible initial state")
    f = sysm.F(x)
    for it in range(options.max_newton):
        if not np.all(np.isfinite(f)):
            bad = int(np.nonzero(~np.isfinite(f))[0][0])
            return sysm.to_state(x, residual=f, step_norms=norms, damping=damps,
                                 message=f"non-finite residual at unknown {bad}")
        lu = _factor(sysm.J(x, f))
        if lu is None:
            return sysm.to_state(x, residual=f, step_norms=norms, damping=damps,
                                 message="singular Jacobian")
        dx = -lu.solve(f)
        nrm = sysm.norm(dx, x)
        if not np.isfinite(nrm):
            return sysm.to_state(x, residual=f, step_norms=norms, damping=damps,
                                 message="non-finite Newton step")
        if nrm <= options.newton_tol:
            x = x + dx
            f = sysm.F(x)
            norms.append(nrm)
            damps.append(1.0)
            return sysm.to_state(x, residual=f, step_norms=norms, damping=damps,
                                 converged=True, message=f"converged in {it + 1} iterations")
        lam = 1.0
        while True:
            xt = x + lam * dx
            if sysm.admissible(xt):
                ft = sysm.F(xt)
                if np.all(np.isfinite(ft)):
                    nt = sysm.norm(lu.solve(ft), xt)
                    if nt < nrm:
                        break
            lam *= 0.5
            if lam < options.damping_min:
                norms.append(nrm)
                return sysm.to_state(x, residual=f, step_norms=norms, damping=damps,
                                     message="damping floor reached without decrease")
        norms.append(nrm)
        damps.append(lam)
        log.debug("newton %d: |dx| = %.3e, lambda = %g", it, nrm, lam)
        x, f = xt, ft
    return sysm.to_state(x, residual=f, step_norms=norms, damping=damps,
                         message=f"no convergence in {options.max_newton} iterations")


def steady_step_norm(sysm: FvSystem, x) -> float:
    f = sysm.F(x)
    if not np.all(np.isfinite(f)):
        return np.inf
    lu = _factor(sysm.J(x, f))
    if lu is None:
        return np.inf
    return sysm.norm(lu.solve(f), x)


def pseudo_transient(state0: FvState, mesh: FvMesh, params: PhysicalParams,
                     options: FvOptions = FvOptions(), sources: Sources | None = None) -> FvState:
    """Backward-Euler pseudo-time marching, then damped Newton.

    Steps grow by ``pt_growth`` after each success and shrink by 4 after a
    failure.  The march stops as soon as the steady Newton step from the
    current state is below ``pt_switch_tol``.
    """
    sysm = FvSystem(mesh, params, options, sources)
    x = sysm.pack(state0)
    if not sysm.admissible(x):
        return sysm.to_state(x, message="inadmissible initial state")
    dt = options.pt_dt0
    n_steps = 0
    n_fail = 0
    while True:
        if steady_step_norm(sysm, x) <= options.pt_switch_tol:
            break
        if n_steps >= options.pt_max_steps:
            return sysm.to_state(x, message=f"pseudo-transient stagnation after {n_steps} steps",
                                 n_pseudo=n_steps)
        x_new = _implicit_euler_step(sysm, x, dt, options)
        if x_new is None:
            dt *= 0.25
            n_fail += 1
            if n_fail > 30:
                return sysm.to_state(x, message="pseudo-transient step size collapse",
                                     n_pseudo=n_steps)
            continue
        x = x_new
        n_steps += 1
        dt *= options.pt_growth
    st = newton_solve(sysm.to_state(x), mesh, params, options, sources, system=sysm)
    st.n_pseudo = n_steps
    return st


def _implicit_euler_step(sysm: FvSystem, x_old, dt, options):
    m = sysm.mass(x_old) / dt
    x = x_old.copy()
    M = sp.diags(m)
    for _ in range(options.pt_newton_iter):
        f = sysm.F(x) + m * (x - x_old)
        if not np.all(np.isfinite(f)):
            return None
        lu = _factor(sysm.J(x) + M)
        if lu is None:
            return None
        dx = -lu.solve(f)
        x = x + dx
        if not sysm.admissible(x):
            return None
        if sysm.norm(dx, x) < 1e-6:
            return x
    return None
