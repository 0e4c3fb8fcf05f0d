"""Steady wave-frame residual of the coupled solid/gas problem.

Unknowns are ordered along x so that the Jacobian is banded apart from the
eigenvalue column:

    [T_solid(0..ns-1), T_s, (T_gas, Y_gas)(0..ng-1), c]

The convective flux of every quantity is mdot times its face value,
mdot = -rho_s c being constant through the wave.  Rows are scaled by fixed
flux units so that norms are comparable between equations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..model import PhysicalParams, R_GAS, flame_temperature, q_pyro
from .mesh import FvMesh

BANDWIDTH = 3


@dataclass(frozen=True, eq=False)
class Layout:
    ns: int
    ng: int

    @property
    def n(self) -> int:
        return self.ns + 2 * self.ng + 2

    @property
    def iTs(self) -> int:
        return self.ns

    @property
    def ic(self) -> int:
        return self.ns + 2 * self.ng + 1

    @property
    def iTg(self) -> np.ndarray:
        return self.ns + 1 + 2 * np.arange(self.ng)

    @property
    def iYg(self) -> np.ndarray:
        return self.ns + 2 + 2 * np.arange(self.ng)

    @classmethod
    def of(cls, mesh: FvMesh) -> "Layout":
        return cls(mesh.n_solid, mesh.n_gas)

    def pack(self, T, Y, T_s, c) -> np.ndarray:
        x = np.empty(self.n)
        x[:self.ns] = T[:self.ns]
        x[self.iTs] = T_s
        x[self.iTg] = T[self.ns:]
        x[self.iYg] = Y
        x[self.ic] = c
        return x

    def unpack(self, x):
        T = np.concatenate([x[:self.ns], x[self.iTg]])
        return T, x[self.iYg].copy(), float(x[self.iTs]), float(x[self.ic])


@dataclass
class Sources:
    """Extra terms for manufactured-solution tests.

    ``energy`` (per cell, W m^-2) and ``species`` (per gas cell, kg m^-2 s^-1)
    are added to the cell balances; ``interface`` to the interface energy row.
    ``c_fixed`` replaces the pyrolysis closure by c = c_fixed.  ``T_left``
    overrides the far-field temperature, ``dTdx_right``/``dYdx_right`` the
    outflow gradients.
    """

    energy: np.ndarray | None = None
    species: np.ndarray | None = None
    interface: float = 0.0
    c_fixed: float | None = None
    T_left: float | None = None
    dTdx_right: float = 0.0
    dYdx_right: float = 0.0
    no_reaction: bool = False


@dataclass(frozen=True)
class Scales:
    energy: float
    species: float

    @classmethod
    def of(cls, params: PhysicalParams) -> "Scales":
        dT = flame_temperature(params) - params.T0
        return cls(energy=params.lambda_g * dT / params.L_ref,
                   species=params.lambda_g / (params.c_p * params.L_ref))


def _one_sided_weights(d1, d2):
    """Weights for f'(0) from f(0), f(z1), f(z2) with quadratic interpolation."""
    w0 = -1.0 / d1 - 1.0 / d2
    w1 = -d2 / (d1 * (d1 - d2))
    w2 = -d1 / (d2 * (d2 - d1))
    return w0, w1, w2


@dataclass(frozen=True, eq=False)
class Geometry:
    """Mesh-dependent coefficients reused by every residual evaluation."""

    mesh: FvMesh
    xc: np.ndarray
    dx: np.ndarray
    dxc_s: np.ndarray        # centre distances across interior solid faces
    dxc_g: np.ndarray
    lin_s: np.ndarray        # linear-interpolation weight of the right cell
    lin_g: np.ndarray
    wm: tuple                # solid-side one-sided gradient weights (T_s, T_ns-1, T_ns-2)
    wp: tuple                # gas-side weights (T_s, T_g0, T_g1)
    half0: float             # distance from the left boundary face to the first centre

    @classmethod
    def of(cls, mesh: FvMesh) -> "Geometry":
        xc, dx, ns = mesh.centers, mesh.widths, mesh.n_solid
        f = mesh.faces
        xs, xg = xc[:ns], xc[ns:]
        dxc_s = np.diff(xs)
        dxc_g = np.diff(xg)
        lin_s = (f[1:ns] - xs[:-1]) / dxc_s
        lin_g = (f[ns + 1:-1] - xg[:-1]) / dxc_g
        wm = _one_sided_weights(xs[-1], xs[-2])
        wp = _one_sided_weights(xg[0], xg[1])
        return cls(mesh, xc, dx, dxc_s, dxc_g, lin_s, lin_g, wm, wp, xc[0] - f[0])


def _face_values(phi, lin, mdot_coef, dxc, diff, scheme):
    """Convected face values on interior faces for the chosen scheme."""
    up = phi[:-1] if mdot_coef >= 0 else phi[1:]
    central = phi[:-1] + lin * (phi[1:] - phi[:-1])
    if scheme == "upwind":
        return up
    if scheme == "centred":
        return central
    pe = np.abs(mdot_coef) * dxc / diff
    w = 1.0 - np.minimum(1.0, 0.5 * pe)
    return up + w * (central - up)


def residual(x, geom: Geometry, layout: Layout, params: PhysicalParams, scheme: str,
             scales: Scales, sources: Sources | None = None, parts: bool = False):
    """Scaled steady residual vector (same ordering as the unknowns)."""
    p = params
    ns, ng = layout.ns, layout.ng
    Tsol = x[:ns]
    T_s = x[layout.iTs]
    Tg = x[layout.iTg]
    Yg = x[layout.iYg]
    c = x[layout.ic]
    mdot = -p.rho_s * c
    src = sources
    T_left = p.T0 if src is None or src.T_left is None else src.T_left
    dTdx_r = 0.0 if src is None else src.dTdx_right
    dYdx_r = 0.0 if src is None else src.dYdx_right
    dx = geom.dx

    # solid energy
    gm = geom.wm[0] * T_s + geom.wm[1] * Tsol[-1] + geom.wm[2] * Tsol[-2]
    F = np.empty(ns + 1)
    F[0] = mdot * p.c_s * T_left - p.lambda_s * (Tsol[0] - T_left) / geom.half0
    Tf = _face_values(Tsol, geom.lin_s, mdot * p.c_s, geom.dxc_s, p.lambda_s, scheme)
    F[1:ns] = mdot * p.c_s * Tf - p.lambda_s * np.diff(Tsol) / geom.dxc_s
    F[ns] = mdot * p.c_s * T_s - p.lambda_s * gm
    r_sol = np.diff(F)

    # gas energy and species
    gp = geom.wp[0] * T_s + geom.wp[1] * Tg[0] + geom.wp[2] * Tg[1]
    if src is not None and src.no_reaction:
        omega = np.zeros(ng)
    else:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            omega = p.A_reac * (p.P / R_GAS) * Yg * np.exp(-p.T_a / Tg)
    vol = omega * dx[ns:]
    Q_mol = -p.nu * p.M * p.Q_g
    G = np.empty(ng + 1)
    G[0] = mdot * p.c_p * T_s - p.lambda_g * gp
    Tf = _face_values(Tg, geom.lin_g, mdot * p.c_p, geom.dxc_g, p.lambda_g, scheme)
    G[1:ng] = mdot * p.c_p * Tf - p.lambda_g * np.diff(Tg) / geom.dxc_g
    G[ng] = mdot * p.c_p * Tg[-1] - p.lambda_g * dTdx_r
    r_gas = np.diff(G) - Q_mol * vol

    rhoD = p.lambda_g / (p.c_p * p.Le)
    H = np.empty(ng + 1)
    H[0] = mdot
    Yf = _face_values(Yg, geom.lin_g, mdot, geom.dxc_g, rhoD, scheme)
    H[1:ng] = mdot * Yf - rhoD * np.diff(Yg) / geom.dxc_g
    H[ng] = mdot * Yg[-1] - rhoD * dYdx_r
    r_spec = np.diff(H) - p.nu * p.M * vol

    r_int = p.lambda_s * gm - p.lambda_g * gp - mdot * q_pyro(T_s, p)
    if src is not None:
        if src.energy is not None:
            r_sol = r_sol - src.energy[:ns]
            r_gas = r_gas - src.energy[ns:]
        if src.species is not None:
            r_spec = r_spec - src.species
        r_int = r_int - src.interface

    if src is not None and src.c_fixed is not None:
        r_c = (c - src.c_fixed) / abs(src.c_fixed) if src.c_fixed != 0 else c
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            m_law = p.A_p * np.exp(-p.T_ap / T_s) if T_s > 0 else 0.0
            if p.cutoff.enabled:
                m_law = m_law * p.cutoff.factor(T_s - p.T0)
            r_c = np.log(mdot) - np.log(m_law) if (mdot > 0 and m_law > 0) else np.nan

    if parts:
        return dict(F=F, G=G, H=H, omega=omega, r_sol=r_sol, r_gas=r_gas, r_spec=r_spec,
                    r_int=r_int, r_c=r_c, mdot=mdot, grad_minus=gm, grad_plus=gp)
    out = np.empty(layout.n)
    out[:ns] = r_sol / scales.energy
    out[layout.iTs] = r_int / scales.energy
    out[layout.iTg] = r_gas / scales.energy
    out[layout.iYg] = r_spec / scales.species
    out[layout.ic] = r_c
    return out


def mass_matrix(x, geom: Geometry, layout: Layout, params: PhysicalParams, scales: Scales):
    """Diagonal of the (scaled) capacity terms used for pseudo-time stepping."""
    p = params
    ns = layout.ns
    m = np.zeros(layout.n)
    dx = geom.dx
    Tg = np.maximum(x[layout.iTg], 1.0)
    rho_g = p.P * p.M / (R_GAS * Tg)
    m[:ns] = p.rho_s * p.c_s * dx[:ns] / scales.energy
    m[layout.iTg] = rho_g * p.c_p * dx[ns:] / scales.energy
    m[layout.iYg] = rho_g * dx[ns:] / scales.species
    return m


# -- Jacobian by coloured finite differences -------------------------------------

@dataclass(frozen=True, eq=False)
class JacobianPattern:
    groups: list            # list of (cols, rows, owner_cols) per colour
    n: int
    ic: int


def jacobian_pattern(layout: Layout) -> JacobianPattern:
    n, ic = layout.n, layout.ic
    nb = n - 1                 # banded block excludes the eigenvalue row/column
    width = 2 * BANDWIDTH + 1
    groups = []
    for g in range(width):
        cols = np.arange(g, nb, width)
        rows, owners = [], []
        for off in range(-BANDWIDTH, BANDWIDTH + 1):
            r = cols + off
            ok = (r >= 0) & (r < nb)
            rows.append(r[ok])
            owners.append(cols[ok])
        rows = np.concatenate(rows)
        owners = np.concatenate(owners)
        # the closure row depends on T_s only (besides c)
        sel = owners == layout.iTs
        if np.any(sel):
            rows = np.concatenate([rows, [ic]])
            owners = np.concatenate([owners, [layout.iTs]])
        groups.append((cols, rows, owners))
    return JacobianPattern(groups, n, ic)


def perturbation(x, layout: Layout, params: PhysicalParams):
    eps = np.sqrt(np.finfo(float).eps)
    d = np.empty_like(x)
    d[:] = eps * np.maximum(np.abs(x), 1e-2)
    T_ref = max(params.T0, 100.0)
    t_idx = np.concatenate([np.arange(layout.ns), [layout.iTs], layout.iTg])
    d[t_idx] = eps * np.maximum(np.abs(x[t_idx]), T_ref)
    d[layout.ic] = eps * max(abs(x[layout.ic]), 1e-12)
    return d


def fd_jacobian(fun, x, f0, pattern: JacobianPattern, delta) -> sp.csc_matrix:
    """Sparse Jacobian from 2*BANDWIDTH+2 residual evaluations."""
    rows_all, cols_all, vals_all = [], [], []
    for cols, rows, owners in pattern.groups:
        xp = x.copy()
        xp[cols] += delta[cols]
        h = xp - x
        f1 = fun(xp)
        rows_all.append(rows)
        cols_all.append(owners)
        vals_all.append((f1[rows] - f0[rows]) / h[owners])
    ic = pattern.ic
    xp = x.copy()
    xp[ic] += delta[ic]
    f1 = fun(xp)
    rows_all.append(np.arange(pattern.n))
    cols_all.append(np.full(pattern.n, ic))
    vals_all.append((f1 - f0) / (xp[ic] - x[ic]))
    J = sp.csc_matrix((np.concatenate(vals_all), (np.concatenate(rows_all), np.concatenate(cols_all))),
                      shape=(pattern.n, pattern.n))
    return J
