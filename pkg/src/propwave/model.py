"""Physical parameters, thermochemical closures and the dimensionless problem.

Conventions
-----------
The wave travels towards negative x; the regression velocity ``c`` is negative
and the surface mass flux is ``mdot = -rho_s * c``.  Dimensionless variables are

    x~ = x / L_ref,   c~ = c L_ref / D_s,   theta = (T - T0) / (T_f - T0),

with ``D_s = lambda_s / (rho_s c_s)``.  In the gas the temperature gradient
``gamma = dtheta/dx~`` obeys

    dgamma/dtheta = -eta * (c_p / c_s) * c~ - Psi(theta) / gamma,

and in the solid ``gamma = -c~ theta`` exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np
from scipy.constants import R as R_GAS

from .errors import ConfigurationError, DomainError

__all__ = [
    "R_GAS",
    "Cutoff",
    "PhysicalParams",
    "DerivedQuantities",
    "DimensionlessProblem",
    "reference_params",
    "load_params",
    "params_from_dict",
    "params_to_dict",
    "pyrolysis_mass_flux",
    "surface_temperature_from_c",
    "q_pyro",
    "flame_temperature",
    "mass_fraction_of_theta",
    "gas_density",
    "reaction_rate",
    "psi",
    "target_S",
    "derive",
    "nondimensionalize",
]


@dataclass(frozen=True)
class Cutoff:
    """Smooth switch-off of the pyrolysis law near T0.

    The flux is multiplied by a C-infinity step that is 0 for Ts <= T0 and
    exactly 1 for Ts >= T0 + width.
    """

    enabled: bool = False
    width: float = 50.0

    def __post_init__(self):
        if not isinstance(self.enabled, bool):
            raise ConfigurationError("cutoff.enabled must be a boolean", "cutoff.enabled")
        if not (np.isfinite(self.width) and self.width > 0):
            raise ConfigurationError("cutoff.width must be positive", "cutoff.width")

    def factor(self, dT):
        y = np.asarray(dT, dtype=float) / self.width
        out = np.zeros_like(y)
        out[y >= 1.0] = 1.0
        mid = (y > 0.0) & (y < 1.0)
        if np.any(mid):
            ym = y[mid]
            a = np.exp(-1.0 / ym)
            b = np.exp(-1.0 / (1.0 - ym))
            out[mid] = a / (a + b)
        return out if out.ndim else float(out)


_POSITIVE = ("P", "rho_s", "lambda_s", "c_s", "lambda_g", "c_p", "M",
             "A_reac", "A_p", "L_ref", "T0", "T_std", "Q_g", "T_ap", "Le")


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional constants of the propellant, the gas and both kinetic laws (SI)."""

    T0: float = 300.0
    P: float = 5.0e6
    rho_s: float = 1800.0
    lambda_s: float = 0.4
    c_s: float = 1200.0
    lambda_g: float = 0.2
    c_p: float = 1200.0
    M: float = 0.024
    nu: float = -1.0
    Q_g: float = 3.9e6
    Q_p_std: float = 1.8e5
    T_std: float = 298.15
    A_reac: float = 100.0
    T_a: float = 7216.0
    A_p: float = 5.4e4
    T_ap: float = 8000.0
    Le: float = 1.0
    L_ref: float = 1.0e-4
    cutoff: Cutoff = field(default_factory=Cutoff)

    def __post_init__(self):
        for f in fields(self):
            if f.name == "cutoff":
                continue
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, (int, float, np.floating, np.integer)):
                raise ConfigurationError(f"{f.name} must be a number, got {v!r}", f.name)
            v = float(v)
            object.__setattr__(self, f.name, v)
            if not math.isfinite(v):
                raise ConfigurationError(f"{f.name} must be finite", f.name)
        if isinstance(self.cutoff, Mapping):
            object.__setattr__(self, "cutoff", Cutoff(**self.cutoff))
        for name in _POSITIVE:
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be strictly positive, got {getattr(self, name)!r}", name)
        if self.nu >= 0:
            raise ConfigurationError("nu must be negative (reactant is consumed)", "nu")
        if self.T_a < 0:
            raise ConfigurationError("T_a must be non-negative", "T_a")
        T_f = flame_temperature(self)
        # Q_p is affine in Ts, so checking both ends of [T0, T_f] covers the range
        for Ts in (self.T0, T_f):
            if q_pyro(Ts, self) <= -self.Q_g:
                raise ConfigurationError(
                    f"pyrolysis heat Q_p({Ts:.6g} K) = {q_pyro(Ts, self):.6g} violates Q_p > -Q_g",
                    "Q_p_std")

    def with_(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)


def reference_params(**overrides) -> PhysicalParams:
    """Default AP/HTPB-like case at 5 MPa (regression speed of about 1.9 mm/s)."""
    return PhysicalParams(**overrides)


_FIELD_NAMES = tuple(f.name for f in fields(PhysicalParams))


def params_from_dict(doc: Mapping[str, Any], base: PhysicalParams | None = None) -> PhysicalParams:
    """Build parameters from a mapping with the field names of PhysicalParams.

    Missing keys take the values of ``base`` (the reference case by default);
    unknown keys are rejected.
    """
    if not isinstance(doc, Mapping):
        raise ConfigurationError("parameter document must be a JSON object")
    unknown = sorted(set(doc) - set(_FIELD_NAMES))
    if unknown:
        raise ConfigurationError(f"unknown parameter(s): {', '.join(unknown)}", unknown[0])
    kw = dict(doc)
    if "cutoff" in kw:
        cut = kw["cutoff"]
        if isinstance(cut, Cutoff):
            pass
        elif isinstance(cut, Mapping):
            bad = sorted(set(cut) - {"enabled", "width"})
            if bad:
                raise ConfigurationError(f"unknown cutoff key(s): {', '.join(bad)}", "cutoff." + bad[0])
            kw["cutoff"] = Cutoff(**cut)
        else:
            raise ConfigurationError("cutoff must be an object {enabled, width}", "cutoff")
    base = base or PhysicalParams()
    return replace(base, **kw)


def params_to_dict(params: PhysicalParams) -> dict:
    return asdict(params)


def load_params(path) -> PhysicalParams:
    """Read a JSON parameter document (SI units)."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
    return params_from_dict(doc)


# -- thermochemistry ---------------------------------------------------------

def _check_finite(name, v):
    a = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} must be finite")
    return a


def pyrolysis_mass_flux(Ts, params: PhysicalParams):
    """Surface mass flux A_p exp(-T_ap/Ts) [kg m^-2 s^-1], optionally cut off near T0."""
    Ts = _check_finite("Ts", Ts)
    if np.any(Ts <= 0):
        raise DomainError("Ts must be positive")
    m = params.A_p * np.exp(-params.T_ap / Ts)
    if params.cutoff.enabled:
        m = m * params.cutoff.factor(Ts - params.T0)
    return m if m.ndim else float(m)


def surface_temperature_from_c(c, params: PhysicalParams) -> float:
    """Invert the pyrolysis law for the surface temperature given the velocity c < 0."""
    c = float(_check_finite("c", c))
    if c >= 0:
        raise DomainError("c must be negative: no regression for c >= 0")
    mdot = -params.rho_s * c
    if mdot >= params.A_p:
        raise DomainError(f"mass flux {mdot:.6g} >= A_p = {params.A_p:.6g}: pyrolysis law not invertible")
    Ts = params.T_ap / math.log(params.A_p / mdot)
    if not params.cutoff.enabled:
        return Ts
    from .odekit import find_root

    # the cut-off only lowers the flux, so the root lies above the uncut inverse
    lo = max(params.T0, Ts)
    hi = max(Ts, params.T0 + params.cutoff.width)
    if lo == hi:
        return lo
    g = lambda T: math.log(max(pyrolysis_mass_flux(T, params), 1e-300)) - math.log(mdot)
    return find_root(g, lo, hi, xtol=1e-13 * hi, ftol=0.0).root


def q_pyro(Ts, params: PhysicalParams):
    """Pyrolysis heat Q_p(Ts) = Q_p_std + (c_s - c_p)(Ts - T_std) [J/kg]."""
    Ts = _check_finite("Ts", Ts)
    q = params.Q_p_std + (params.c_s - params.c_p) * (Ts - params.T_std)
    return q if q.ndim else float(q)


def flame_temperature(params: PhysicalParams) -> float:
    """Burnt-gas temperature from the global energy balance (independent of Ts)."""
    r = params.c_s / params.c_p
    T_f = r * params.T0 + (params.Q_p_std + params.Q_g) / params.c_p + (1.0 - r) * params.T_std
    if not T_f > params.T0:
        raise ConfigurationError(f"flame temperature {T_f:.6g} K does not exceed T0", "Q_g")
    return T_f


def gas_density(T, params: PhysicalParams):
    """Ideal-gas density P M / (R T)."""
    T = _check_finite("T", T)
    if np.any(T <= 0):
        raise DomainError("T must be positive")
    rho = params.P * params.M / (R_GAS * T)
    return rho if rho.ndim else float(rho)


def reaction_rate(T, Y, params: PhysicalParams):
    """Molar rate A [G1] T exp(-T_a/T) with [G1] = rho Y / M  [mol m^-3 s^-1]."""
    T = _check_finite("T", T)
    Y = _check_finite("Y", Y)
    if np.any(T <= 0):
        raise DomainError("T must be positive")
    if np.any(Y < 0):
        raise DomainError("Y must be non-negative")
    w = _omega(T, Y, params)
    return w if np.ndim(w) else float(w)


def _omega(T, Y, params):
    # rho T / M = P / R, so the explicit temperature factor cancels
    return params.A_reac * (params.P / R_GAS) * Y * np.exp(-params.T_a / T)


# -- derived and dimensionless quantities ------------------------------------

@dataclass(frozen=True)
class DerivedQuantities:
    T_f: float
    eta: float
    D_s: float
    theta_s_min: float | None
    c_max: float
    c_min: float | None
    ratio_cs_cp: float


def _Ts_min(params: PhysicalParams) -> float:
    # Ts - T0 = Q_p(Ts) / c_s : zero heat feedback from the gas
    return (params.c_s * params.T0 + params.Q_p_std - (params.c_s - params.c_p) * params.T_std) / params.c_p


def derive(params: PhysicalParams) -> DerivedQuantities:
    T_f = flame_temperature(params)
    dT = T_f - params.T0
    c_max = -pyrolysis_mass_flux(T_f, params) / params.rho_s
    theta_s_min = c_min = None
    Ts_min = _Ts_min(params)
    if q_pyro(Ts_min, params) > 0 and params.T0 < Ts_min < T_f:
        theta_s_min = (Ts_min - params.T0) / dT
        c_min = -pyrolysis_mass_flux(Ts_min, params) / params.rho_s
    return DerivedQuantities(
        T_f=T_f,
        eta=params.lambda_s / params.lambda_g,
        D_s=params.lambda_s / (params.rho_s * params.c_s),
        theta_s_min=theta_s_min,
        c_max=c_max,
        c_min=c_min,
        ratio_cs_cp=params.c_s / params.c_p,
    )


@dataclass(frozen=True)
class DimensionlessProblem:
    """Nondimensional form of the wave problem for given physical parameters.

    ``conv`` is the factor multiplying eta*c~ in the gas equation, c_p/c_s.
    Psi(theta) = K * (1 - theta) * exp(-T_a / T(theta)) in closed form.
    """

    params: PhysicalParams
    derived: DerivedQuantities
    eta: float
    ratio_cs_cp: float
    conv: float
    L_ref: float
    D_s: float
    T0: float
    T_f: float
    psi_K: float

    @classmethod
    def from_params(cls, params: PhysicalParams) -> "DimensionlessProblem":
        d = derive(params)
        dT = d.T_f - params.T0
        Q_mol = -params.nu * params.M * params.Q_g
        y_fac = params.c_p * dT / params.Q_g
        K = (params.L_ref ** 2 * Q_mol / (params.lambda_g * dT)
             * params.A_reac * params.P / R_GAS * y_fac)
        return cls(params=params, derived=d, eta=d.eta, ratio_cs_cp=d.ratio_cs_cp,
                   conv=params.c_p / params.c_s, L_ref=params.L_ref, D_s=d.D_s,
                   T0=params.T0, T_f=d.T_f, psi_K=K)

    @property
    def dT(self) -> float:
        return self.T_f - self.T0

    # conversions
    def theta(self, T):
        return (np.asarray(T, dtype=float) - self.T0) / self.dT

    def temperature(self, theta):
        return self.T0 + np.asarray(theta, dtype=float) * self.dT

    def c_tilde(self, c):
        return c * self.L_ref / self.D_s

    def c_dim(self, c_tilde):
        return c_tilde * self.D_s / self.L_ref

    @property
    def c_max_tilde(self) -> float:
        return self.c_tilde(self.derived.c_max)

    @property
    def c_min_tilde(self):
        return None if self.derived.c_min is None else self.c_tilde(self.derived.c_min)

    def m_tilde(self, c_tilde) -> float:
        """Coefficient of the convective term, -eta (c_p/c_s) c~ (>= 0)."""
        return -self.eta * self.conv * c_tilde

    # source terms
    def psi(self, theta):
        return psi(theta, self)

    def psi_slope(self) -> float:
        """Analytic dPsi/dtheta at theta = 1 (negative for positive rates)."""
        return -self.psi_K * math.exp(-self.params.T_a / self.T_f)

    def S(self, c_tilde, theta_s=None):
        return target_S(c_tilde, self, theta_s=theta_s)

    def theta_s_of_c(self, c_tilde) -> float:
        Ts = surface_temperature_from_c(self.c_dim(c_tilde), self.params)
        return (Ts - self.T0) / self.dT

    def c_of_theta_s(self, theta_s) -> float:
        Ts = self.T0 + theta_s * self.dT
        return self.c_tilde(-pyrolysis_mass_flux(Ts, self.params) / self.params.rho_s)

    def mass_fraction(self, theta):
        return mass_fraction_of_theta(theta, self.params)

    def I0(self, theta_s=0.0, rtol=1e-12) -> float:
        """Integral of Psi over [theta_s, 1]."""
        from .odekit import quad

        return quad(self.psi, theta_s, 1.0, rtol=rtol)


def nondimensionalize(params: PhysicalParams) -> DimensionlessProblem:
    return DimensionlessProblem.from_params(params)


def mass_fraction_of_theta(theta, params: PhysicalParams):
    """Reactant mass fraction on the constant-enthalpy line, Y = c_p (T_f - T) / Q_g.

    Values above 1 (theta below the minimum surface temperature) are returned
    unchanged; see :func:`exceeds_unity`.
    """
    th = _check_finite("theta", theta)
    if np.any((th < 0) | (th > 1)):
        raise DomainError("theta must lie in [0, 1]")
    T_f = flame_temperature(params)
    Y = params.c_p * (T_f - params.T0) * (1.0 - th) / params.Q_g
    return Y if Y.ndim else float(Y)


def exceeds_unity(Y) -> bool:
    """Diagnostic flag for mass fractions above 1."""
    return bool(np.any(np.asarray(Y) > 1.0))


def psi(theta, problem: DimensionlessProblem):
    """Dimensionless heat source L^2 Q_mol omega / (lambda_g (T_f - T0))."""
    th = _check_finite("theta", theta)
    if np.any((th < 0) | (th > 1)):
        raise DomainError("theta must lie in [0, 1]")
    T = problem.T0 + th * problem.dT
    out = problem.psi_K * (1.0 - th) * np.exp(-problem.params.T_a / T)
    return out if out.ndim else float(out)


def target_S(c_tilde, problem: DimensionlessProblem, theta_s=None) -> float:
    """Interface jump target eta Q_p(Ts) c~ / (c_s (T_f - T0)).

    Ts follows from the pyrolysis law unless ``theta_s`` is given
    (fixed-surface-temperature mode).
    """
    c_tilde = float(c_tilde)
    if c_tilde > 0:
        raise DomainError("c_tilde must be non-positive")
    if c_tilde == 0.0:
        return 0.0
    p = problem.params
    if theta_s is None:
        theta_s = problem.theta_s_of_c(c_tilde)
    Ts = problem.T0 + theta_s * problem.dT
    return problem.eta * q_pyro(Ts, p) * c_tilde / (p.c_s * problem.dT)
