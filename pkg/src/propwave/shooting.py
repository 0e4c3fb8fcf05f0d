"""Phase-plane shooting for the regression-velocity eigenvalue.

The gas orbit gamma(theta) leaves the burnt state theta = 1 along the stable
eigendirection gamma = alpha (1 - theta) and is integrated backwards to the
surface temperature theta_s fixed by the pyrolysis law.  The mismatch

    xi(c~) = gamma(theta_s+) - eta * gamma(theta_s-) - S(c~),
    gamma(theta_s-) = -c~ theta_s,

is strictly increasing in c~ and changes sign once on the bracket
(c~_max, c~_min); its root is the dimensionless regression velocity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import BracketError, DomainError, IntegrationError, ModelError
from .model import (DimensionlessProblem, PhysicalParams, gas_density, nondimensionalize,
                    pyrolysis_mass_flux, q_pyro)
from .odekit import CompiledSystem, IvpSpec, find_root, integrate, quad

__all__ = [
    "ShootOptions",
    "Orbit",
    "Profiles",
    "WaveSolution",
    "XiScan",
    "slope_from_quadratic",
    "psi_slope_fd",
    "critical_slope",
    "integrate_gas_orbit",
    "mismatch_xi",
    "xi_limit_zero",
    "bracket",
    "xi_scan",
    "solve_wave",
    "solve_constant_ts",
    "reconstruct_profile",
    "reaction_integral",
    "pressure_drop",
]


@dataclass(frozen=True)
class ShootOptions:
    dtheta_offset: float = 1e-6
    rtol: float = 1e-14
    atol: float = 1e-14
    gamma_floor: float = 1e-13
    xtol_rel: float = 1e-14
    eps_b: float = 1e-9
    eps_s: float = 1e-9
    beta: str = "analytic"          # or "fd"
    max_steps: int = 200_000
    max_brent_iter: int = 100

    def __post_init__(self):
        if not 0 < self.dtheta_offset < 0.5:
            raise ValueError("dtheta_offset must lie in (0, 0.5)")
        if self.beta not in ("analytic", "fd"):
            raise ValueError("beta must be 'analytic' or 'fd'")
        if self.gamma_floor <= 0:
            raise ValueError("gamma_floor must be positive")


# -- critical point ---------------------------------------------------------------

def slope_from_quadratic(m: float, beta: float) -> float:
    """Negative root of a^2 - m a + beta = 0 for beta < 0.

    Written as 2 beta / (m + sqrt(m^2 - 4 beta)), which equals
    (m/2)(1 - sqrt(1 - 4 beta/m^2)) without cancellation and stays valid at m = 0.
    """
    if not beta < 0:
        raise ModelError(f"dPsi/dtheta(1) = {beta!r} is not negative: no hyperbolic departure")
    return 2.0 * beta / (m + math.sqrt(m * m - 4.0 * beta))


def psi_slope_fd(problem: DimensionlessProblem, h: float = 1e-7) -> float:
    """One-sided difference for dPsi/dtheta at theta = 1 with one Richardson step."""
    d1 = -problem.psi(1.0 - h) / h
    d2 = -problem.psi(1.0 - h / 2) / (h / 2)
    return 2.0 * d2 - d1


def critical_slope(c_tilde: float, problem: DimensionlessProblem, beta: str = "analytic") -> float:
    """Departure slope alpha < 0 of the orbit at the burnt state.

    Near theta = 1 the orbit is gamma = -alpha (1 - theta), i.e. alpha is the
    slope d gamma / d theta there.  Linearising gives alpha^2 - m alpha + beta = 0
    with m = -eta (c_p/c_s) c~ and beta = dPsi/dtheta(1).
    """
    if c_tilde > 0:
        raise DomainError("c_tilde must be non-positive")
    b = problem.psi_slope() if beta == "analytic" else psi_slope_fd(problem)
    return slope_from_quadratic(problem.m_tilde(c_tilde), b)


# -- orbit integration --------------------------------------------------------------

@njit(cache=True)
def _orbit_rhs(theta, y, a):
    # a = [m, K, T0, dT, T_a, floor]
    psi = a[1] * (1.0 - theta) * math.exp(-a[4] / (a[2] + theta * a[3]))
    return np.array([a[0] - psi / y[0]])


@njit(cache=True)
def _orbit_jac(theta, y, a):
    psi = a[1] * (1.0 - theta) * math.exp(-a[4] / (a[2] + theta * a[3]))
    J = np.empty((1, 1))
    J[0, 0] = psi / (y[0] * y[0])
    return J


@njit(cache=True)
def _orbit_event(theta, y, a):
    return y[0] - a[5]


_ORBIT_SYSTEM = CompiledSystem(_orbit_rhs, jac=_orbit_jac, event=_orbit_event)


@dataclass
class Orbit:
    """Gas-phase trajectory gamma(theta), stored with decreasing theta."""

    theta_grid: np.ndarray
    gamma_values: np.ndarray
    gamma_plus: float
    gamma_minus: float
    alpha: float
    theta_s: float
    c_tilde: float
    dtheta_offset: float
    terminated_early: bool = False
    theta_star: float | None = None
    trajectory: object = None
    n_steps: int = 0

    @property
    def theta_start(self) -> float:
        return 1.0 - self.dtheta_offset

    def gamma_at(self, theta):
        """Interpolated gamma; the linear departure law is used above 1 - dtheta."""
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        out = -self.alpha * (1.0 - th)
        inner = th < self.theta_start
        if np.any(inner):
            if self.trajectory is None:
                raise DomainError("orbit has no interpolant below the departure point")
            out[inner] = self.trajectory(th[inner])[0]
        return out if np.ndim(theta) else float(out[0])


def _orbit_args(c_tilde, problem, floor):
    p = problem.params
    return np.array([problem.m_tilde(c_tilde), problem.psi_K, problem.T0, problem.dT, p.T_a, floor])


def integrate_gas_orbit(c_tilde: float, problem: DimensionlessProblem,
                        dtheta_offset: float = 1e-6, gamma_floor: float = 1e-13,
                        rtol: float = 1e-14, atol: float = 1e-14, theta_s: float | None = None,
                        beta: str = "analytic", max_steps: int = 200_000) -> Orbit:
    """Integrate the gas orbit from (1 - dtheta, -alpha dtheta) down to theta_s.

    ``theta_s`` defaults to the pyrolysis-law value for ``c_tilde``.
    """
    if theta_s is None:
        theta_s = problem.theta_s_of_c(c_tilde)
    alpha = critical_slope(c_tilde, problem, beta)
    theta1 = 1.0 - dtheta_offset
    gamma_minus = -c_tilde * theta_s
    if theta_s >= theta1:
        # inside the linear departure region (or beyond the burnt state)
        gp = -alpha * max(1.0 - theta_s, 0.0)
        return Orbit(np.array([min(theta_s, 1.0)]), np.array([gp]), gp, gamma_minus, alpha,
                     theta_s, c_tilde, dtheta_offset)
    spec = IvpSpec(_ORBIT_SYSTEM, theta1, [-alpha * dtheta_offset], theta_s, rtol=rtol, atol=atol,
                   max_steps=max_steps,
                   args=_orbit_args(c_tilde, problem, gamma_floor))
    try:
        res = integrate(spec)
    except IntegrationError as exc:
        exc.context["c_tilde"] = c_tilde
        raise IntegrationError(f"orbit integration failed at c~={c_tilde!r}: {exc}",
                               t=exc.t, context=exc.context) from exc
    tr = res.trajectory
    early = res.status == "event"
    gp = 0.0 if early else float(res.y[0])
    return Orbit(tr.ts, tr.ys[:, 0], gp, gamma_minus, alpha, theta_s, c_tilde, dtheta_offset,
                 terminated_early=early, theta_star=res.t if early else None,
                 trajectory=tr, n_steps=res.n_steps)


def _xi_from_orbit(orbit: Orbit, problem: DimensionlessProblem, S: float) -> float:
    return orbit.gamma_plus - problem.eta * orbit.gamma_minus - S


def mismatch_xi(c_tilde: float, problem: DimensionlessProblem,
                options: ShootOptions = ShootOptions(), theta_s: float | None = None) -> float:
    """Interface mismatch xi(c~); zero at the eigenvalue.

    ``c_tilde = 0`` returns the cold limit with theta_s = 0.
    """
    if c_tilde > 0:
        raise DomainError("c_tilde must be non-positive")
    if c_tilde == 0.0:
        return xi_limit_zero(problem, options, theta_s=0.0 if theta_s is None else theta_s)
    if theta_s is None:
        theta_s = problem.theta_s_of_c(c_tilde)
    orbit = _orbit(c_tilde, problem, options, theta_s)
    return _xi_from_orbit(orbit, problem, problem.S(c_tilde, theta_s=theta_s))


def _orbit(c_tilde, problem, options, theta_s):
    return integrate_gas_orbit(c_tilde, problem, options.dtheta_offset, options.gamma_floor,
                               options.rtol, options.atol, theta_s=theta_s, beta=options.beta,
                               max_steps=options.max_steps)


def xi_limit_zero(problem: DimensionlessProblem, options: ShootOptions = ShootOptions(),
                  theta_s: float = 0.0) -> float:
    """xi at c~ = 0: the orbit without convection, equal to sqrt(2 int_{theta_s}^1 Psi)."""
    orbit = _orbit(0.0, problem, options, theta_s)
    return orbit.gamma_plus


# -- bracketing and root finding -------------------------------------------------------

@dataclass(frozen=True)
class _Bracket:
    lo: float
    hi: float
    xi_lo: float
    xi_hi: float
    eps_b: float
    eps_s: float


def _bracket(problem: DimensionlessProblem, options: ShootOptions, max_retries: int = 8) -> _Bracket:
    c_max = problem.c_max_tilde
    theta_min = problem.derived.theta_s_min
    eps_b = options.eps_b
    xi_lo = math.nan
    for _ in range(max_retries + 1):
        lo = c_max * (1.0 - eps_b)
        xi_lo = mismatch_xi(lo, problem, options)
        if xi_lo < 0:
            break
        eps_b *= 10
    eps_s = options.eps_s
    base = theta_min if theta_min is not None else 0.0
    xi_hi = math.nan
    for _ in range(max_retries + 1):
        hi = problem.c_of_theta_s(base + eps_s)
        xi_hi = mismatch_xi(hi, problem, options)
        if xi_hi > 0:
            break
        eps_s *= 10
    if not (xi_lo < 0 < xi_hi):
        raise ModelError(f"could not bracket the eigenvalue: xi(c_lo={lo:.6g})={xi_lo:.6g}, "
                         f"xi(c_hi={hi:.6g})={xi_hi:.6g}")
    if not lo < hi < 0:
        raise ModelError(f"degenerate bracket ({lo}, {hi})")
    return _Bracket(lo, hi, xi_lo, xi_hi, eps_b, eps_s)


def bracket(problem: DimensionlessProblem, options: ShootOptions = ShootOptions()):
    """Dimensionless bracket (c_lo, c_hi) with xi(c_lo) < 0 < xi(c_hi)."""
    b = _bracket(problem, options)
    return b.lo, b.hi


@dataclass
class XiScan:
    c_tilde: np.ndarray
    theta_s: np.ndarray
    xi: np.ndarray
    xi_zero: float

    @property
    def strictly_increasing(self) -> bool:
        return bool(np.all(np.diff(self.xi) > 0))

    @property
    def sign_changes(self) -> int:
        s = np.sign(self.xi)
        s = s[s != 0]
        return int(np.count_nonzero(s[1:] != s[:-1]))


def xi_scan(problem: DimensionlessProblem, n: int = 200, options: ShootOptions = ShootOptions(),
            lo: float | None = None, hi: float | None = None) -> XiScan:
    """Sample xi on n points across the bracket, uniformly spaced in theta_s.

    Uniform theta_s spacing resolves both the fast end (theta_s -> 1) and the
    slow end of the bracket, whose c~ values differ by orders of magnitude.
    """
    if lo is None or hi is None:
        b = _bracket(problem, options)
        lo = b.lo if lo is None else lo
        hi = b.hi if hi is None else hi
    th_lo = problem.theta_s_of_c(lo)
    th_hi = problem.theta_s_of_c(hi)
    th = np.linspace(th_lo, th_hi, n)
    c = np.array([problem.c_of_theta_s(t) for t in th])
    c[0], c[-1] = lo, hi
    xi = np.array([mismatch_xi(ci, problem, options) for ci in c])
    return XiScan(c, th, xi, xi_limit_zero(problem, options))


# -- solutions ------------------------------------------------------------------------

@dataclass
class Profiles:
    """Spatial profiles across the solid (x < 0) and the gas (x >= 0)."""

    x: np.ndarray
    T: np.ndarray
    Y: np.ndarray
    u: np.ndarray
    rho: np.ndarray
    theta: np.ndarray
    gamma: np.ndarray
    gas: np.ndarray

    def columns(self) -> dict:
        return {"x": self.x, "T": self.T, "Y": self.Y, "u": self.u, "rho": self.rho}


@dataclass
class WaveSolution:
    c: float
    c_tilde: float
    T_s: float
    theta_s: float
    mass_flux: float
    xi_residual: float
    bracket: tuple
    bracket_tilde: tuple
    bracket_width: float
    iterations: int
    n_eval: int
    orbit: Orbit
    problem: DimensionlessProblem
    options: ShootOptions
    mode: str = "pyrolysis"
    profiles: Profiles | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def params(self) -> PhysicalParams:
        return self.problem.params


def _check_le(params: PhysicalParams):
    if params.Le != 1.0:
        raise ModelError("the phase-plane reduction needs Le = 1; use the finite-volume solver "
                         "(propwave.fv.solve_fv) for Le != 1")


def _finish(problem, options, c_tilde, theta_s, res, br, mode, with_profile, S_fun):
    orbit = _orbit(c_tilde, problem, options, theta_s)
    xi = _xi_from_orbit(orbit, problem, S_fun(c_tilde))
    c = problem.c_dim(c_tilde)
    mdot = -problem.params.rho_s * c
    lo, hi = res.bracket
    width = (hi - lo) / abs(c_tilde)
    sol = WaveSolution(
        c=c, c_tilde=c_tilde, T_s=float(problem.temperature(theta_s)), theta_s=theta_s,
        mass_flux=mdot, xi_residual=xi, bracket=(problem.c_dim(br[0]), problem.c_dim(br[1])),
        bracket_tilde=tuple(br), bracket_width=width, iterations=res.iterations,
        n_eval=res.n_eval, orbit=orbit, problem=problem, options=options, mode=mode)
    if with_profile:
        sol.profiles = reconstruct_profile(orbit, problem, c_tilde)
    return sol


def solve_wave(params: PhysicalParams, options: ShootOptions = ShootOptions(),
               profile: bool = True) -> WaveSolution:
    """Regression velocity, surface temperature and profiles of the travelling wave."""
    _check_le(params)
    problem = nondimensionalize(params)
    br = _bracket(problem, options)
    f = lambda c: mismatch_xi(c, problem, options)
    res = find_root(f, br.lo, br.hi, xtol=0.0, rtol=options.xtol_rel, f_lo=br.xi_lo, f_hi=br.xi_hi,
                    max_iter=options.max_brent_iter)
    c_t = res.root
    theta_s = problem.theta_s_of_c(c_t)
    sol = _finish(problem, options, c_t, theta_s, res, (br.lo, br.hi), "pyrolysis", profile,
                  lambda c: problem.S(c, theta_s=theta_s))
    sol.diagnostics.update(eps_b=br.eps_b, eps_s=br.eps_s, xi_lo=br.xi_lo, xi_hi=br.xi_hi)
    return sol


def solve_constant_ts(Ts_fixed: float, params: PhysicalParams,
                      options: ShootOptions = ShootOptions(), c_scale: float = 1.0,
                      profile: bool = True) -> WaveSolution:
    """Eigenvalue for a prescribed surface temperature (no pyrolysis law).

    The bracket (c_expand, 0) starts from c~ = -|c_scale| and doubles until
    xi < 0; xi(0) = sqrt(2 int_{theta_s}^1 Psi) > 0.
    """
    _check_le(params)
    problem = nondimensionalize(params)
    T_f = problem.T_f
    Ts_low = params.T0 + q_pyro(Ts_fixed, params) / params.c_s
    if not (Ts_low < Ts_fixed < T_f):
        raise ModelError(f"Ts_fixed={Ts_fixed:.6g} K outside ({Ts_low:.6g}, {T_f:.6g}) K")
    theta_s = float(problem.theta(Ts_fixed))
    S = lambda c: problem.S(c, theta_s=theta_s)
    f = lambda c: mismatch_xi(c, problem, options, theta_s=theta_s) if c < 0 else \
        xi_limit_zero(problem, options, theta_s)
    hi, xi_hi = 0.0, f(0.0)
    lo = -abs(c_scale)
    xi_lo = f(lo)
    for _ in range(60):
        if xi_lo < 0:
            break
        hi, xi_hi = lo, xi_lo
        lo *= 2
        xi_lo = f(lo)
    else:
        raise ModelError("no sign change of xi within 60 doublings of the velocity scale")
    res = find_root(f, lo, hi, xtol=0.0, rtol=options.xtol_rel, f_lo=xi_lo, f_hi=xi_hi,
                    max_iter=options.max_brent_iter)
    sol = _finish(problem, options, res.root, theta_s, res, (lo, hi), "constant_ts", profile, S)
    return sol


# -- profiles -----------------------------------------------------------------------

def _cumulative_orbit_integral(orbit: Orbit, g, rtol=1e-12):
    """Cumulative integral of g(theta, gamma) dtheta from theta_s up along the orbit nodes.

    Returns increasing theta nodes and the integral values (0 at theta_s).
    """
    tr = orbit.trajectory
    th = tr.ts[::-1]
    ys = tr.ys[::-1, 0]
    Q = tr.Q[::-1]
    t0s = tr.ts[:-1][::-1]
    hs = np.diff(tr.ts)[::-1]
    yold = tr.ys[:-1, 0][::-1]
    vals = np.zeros(th.size)
    acc = 0.0
    for k in range(th.size - 1):
        t0, h, y0 = t0s[k], hs[k], yold[k]
        q0, q1, q2 = Q[k, 0]

        def f(t, t0=t0, h=h, y0=y0, q0=q0, q1=q1, q2=q2):
            x = (t - t0) / h
            gam = y0 + x * (q0 + x * (q1 + x * q2))
            return g(t, gam)

        acc += quad(f, th[k], th[k + 1], rtol=rtol, atol=0.0)
        vals[k + 1] = acc
    return th, ys, vals


def reconstruct_profile(orbit: Orbit, problem: DimensionlessProblem, c_tilde: float | None = None,
                        n_solid: int = 200, n_tail: int = 40, trunc: float = 1e-9) -> Profiles:
    """Spatial profiles from the orbit: x~(theta) = int_{theta_s}^{theta} dz / gamma(z)."""
    if orbit.trajectory is None or orbit.terminated_early:
        raise ModelError("profile reconstruction needs a complete orbit")
    c_tilde = orbit.c_tilde if c_tilde is None else c_tilde
    p = problem.params
    th_s = orbit.theta_s
    # gas
    th_g, gam_g, xg = _cumulative_orbit_integral(orbit, lambda t, gam: 1.0 / gam)
    dth = orbit.dtheta_offset
    if dth > trunc:
        one_m = np.geomspace(dth, trunc, n_tail)[1:]
        x_tail = xg[-1] + np.log(one_m / dth) / orbit.alpha
        th_g = np.concatenate([th_g, 1.0 - one_m])
        gam_g = np.concatenate([gam_g, -orbit.alpha * one_m])
        xg = np.concatenate([xg, x_tail])
    # solid: theta = theta_s exp(-c~ x~)
    if th_s > trunc and c_tilde < 0:
        th_sol = th_s * np.geomspace(trunc / th_s, 1.0, n_solid)[:-1]
        x_sol = np.log(th_sol / th_s) / (-c_tilde)
    else:
        th_sol = x_sol = np.zeros(0)
    gam_sol = -c_tilde * th_sol
    x = np.concatenate([x_sol, xg]) * problem.L_ref
    theta = np.concatenate([th_sol, th_g])
    gamma = np.concatenate([gam_sol, gam_g])
    T = problem.temperature(theta)
    gas = np.concatenate([np.zeros(th_sol.size, bool), np.ones(th_g.size, bool)])
    Y = np.ones_like(T)
    Y[gas] = problem.mass_fraction(np.clip(theta[gas], 0.0, 1.0))
    c = problem.c_dim(c_tilde)
    mdot = -p.rho_s * c
    rho = np.full_like(T, p.rho_s)
    rho[gas] = gas_density(T[gas], p)
    u = np.zeros_like(T)
    u[gas] = c + mdot / rho[gas]
    return Profiles(x=x, T=T, Y=Y, u=u, rho=rho, theta=theta, gamma=gamma, gas=gas)


def reaction_integral(solution: WaveSolution) -> float:
    """Integral of the molar rate over the gas, L int omega / gamma dtheta  [mol m^-2 s^-1]."""
    problem = solution.problem
    orbit = solution.orbit
    p = problem.params
    scale = p.lambda_g * problem.dT / (p.L_ref ** 2 * (-p.nu * p.M * p.Q_g))
    psi_fun = lambda t: problem.psi_K * (1.0 - t) * math.exp(-p.T_a / (problem.T0 + t * problem.dT))
    _, _, vals = _cumulative_orbit_integral(orbit, lambda t, gam: psi_fun(t) / gam)
    # Psi / gamma tends to a constant above the departure point
    t1 = orbit.theta_start
    tail = orbit.dtheta_offset * psi_fun(t1) / (-orbit.alpha * orbit.dtheta_offset)
    return scale * p.L_ref * (vals[-1] + tail)


def pressure_drop(solution) -> float:
    """-mdot (u_far - u_surface) from the gas velocity profile  [Pa]."""
    prof = solution.profiles
    ug = prof.u[prof.gas]
    return -solution.mass_flux * (ug[-1] - ug[0])
