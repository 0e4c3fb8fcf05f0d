import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from propwave import ModelError, reference_params
from propwave.model import flame_temperature, nondimensionalize
from propwave.shooting import (ShootOptions, bracket, critical_slope, integrate_gas_orbit,
                               mismatch_xi, pressure_drop, psi_slope_fd, reaction_integral,
                               slope_from_quadratic, solve_constant_ts, solve_wave, xi_limit_zero,
                               xi_scan)


def test_slope_is_negative_root_of_quadratic():
    for m, beta in [(0.0, -4.0), (3.0, -1.0), (1e3, -1e-6)]:
        a = slope_from_quadratic(m, beta)
        assert a < 0
        assert a * a - m * a + beta == pytest.approx(0.0, abs=1e-12 * max(1.0, m * m))
    with pytest.raises(ModelError):
        slope_from_quadratic(2.0, 0.0)


def test_fd_and_analytic_beta_agree():
    pr = nondimensionalize(reference_params())
    assert psi_slope_fd(pr) == pytest.approx(pr.psi_slope(), rel=1e-8)
    c = -10.0
    assert critical_slope(c, pr, "fd") == pytest.approx(critical_slope(c, pr), rel=1e-8)


def test_reference_solution(ref_wave, ref_params):
    w = ref_wave
    pr = w.problem
    assert pr.c_max_tilde < w.c_tilde < pr.c_min_tilde
    assert w.c == pytest.approx(-1.8667134190583556e-3, rel=1e-11)
    assert w.T_s == pytest.approx(826.039, rel=1e-6)
    assert abs(w.xi_residual) < 1e-9
    assert w.bracket_width <= 1e-14
    assert w.mass_flux == pytest.approx(-ref_params.rho_s * w.c)


def test_xi_increasing_single_crossing():
    pr = nondimensionalize(reference_params())
    scan = xi_scan(pr, n=60)
    assert scan.strictly_increasing
    assert scan.sign_changes == 1


def test_xi_zero_limit_matches_quadrature():
    pr = nondimensionalize(reference_params())
    assert xi_limit_zero(pr) == pytest.approx(math.sqrt(2 * pr.I0(0.0)), rel=1e-10)
    assert mismatch_xi(0.0, pr, ShootOptions()) == xi_limit_zero(pr)


def test_xi_at_c_max_endpoint():
    p = reference_params()
    pr = nondimensionalize(p)
    cm = pr.c_max_tilde
    expect = pr.eta * cm * p.Q_g / (p.Q_p_std + p.Q_g)
    assert mismatch_xi(cm, pr, ShootOptions()) == pytest.approx(expect, rel=1e-12)


def test_bracket_signs():
    pr = nondimensionalize(reference_params())
    lo, hi = bracket(pr)
    o = ShootOptions()
    assert mismatch_xi(lo, pr, o) < 0 < mismatch_xi(hi, pr, o)


def test_zero_activation_orbit_is_linear():
    p = reference_params(T_a=0.0)
    w = solve_wave(p)
    o = w.orbit
    th, g = o.theta_grid, o.gamma_values
    A = np.vstack([th, np.ones_like(th)]).T
    coef, *_ = np.linalg.lstsq(A, g, rcond=None)
    assert np.max(np.abs(A @ coef - g)) <= 1e-8 * np.max(np.abs(g))


def test_lewis_not_one_rejected():
    with pytest.raises(ModelError, match="finite-volume"):
        solve_wave(reference_params(Le=2.0))


def test_profiles_monotone_with_limits(ref_wave, ref_params):
    prof = ref_wave.profiles
    assert np.all(np.diff(prof.x) > 0)
    assert np.all(np.diff(prof.T) >= 0)
    T_f = flame_temperature(ref_params)
    assert prof.T[0] - ref_params.T0 < 1e-6 * (T_f - ref_params.T0)
    assert T_f - prof.T[-1] < 1e-6 * (T_f - ref_params.T0)
    gas = prof.gas
    assert prof.x[gas][0] == 0.0


def test_enthalpy_constant_in_gas(ref_wave, ref_params):
    p = ref_params
    prof = ref_wave.profiles
    g = prof.gas
    h = p.Q_g * prof.Y[g] + p.c_p * (prof.T[g] - flame_temperature(p))
    assert np.max(np.abs(h)) <= 1e-10 * p.c_p * (flame_temperature(p) - p.T0)


def test_reaction_integral_consumes_injected_reactant(ref_wave, ref_params):
    expect = ref_wave.mass_flux / (-ref_params.nu * ref_params.M)
    assert reaction_integral(ref_wave) == pytest.approx(expect, rel=1e-5)


def test_pressure_drop_small_and_negative(ref_wave, ref_params):
    dp = pressure_drop(ref_wave)
    assert dp < 0
    assert abs(dp) / ref_params.P < 1e-3


def test_constant_ts_recovers_full_solve(ref_wave, ref_params):
    w2 = solve_constant_ts(ref_wave.T_s, ref_params)
    assert w2.c == pytest.approx(ref_wave.c, rel=1e-10)
    with pytest.raises(ModelError):
        solve_constant_ts(ref_params.T0 + 1.0, ref_params)


def test_offset_and_tolerance_insensitivity():
    p = reference_params()
    base = solve_wave(p, profile=False).c
    for d in (1e-4, 1e-5, 1e-7):
        assert solve_wave(p, ShootOptions(dtheta_offset=d), profile=False).c == \
            pytest.approx(base, rel=1e-12)
    c12 = solve_wave(p, ShootOptions(rtol=1e-12, atol=1e-12), profile=False).c
    assert c12 == pytest.approx(base, rel=1e-13)


def test_orbit_terminates_early_for_fast_waves():
    pr = nondimensionalize(reference_params())
    o = integrate_gas_orbit(pr.c_max_tilde * 0.999, pr, 1e-6, 1e-13, 1e-12, 1e-12,
                            theta_s=pr.theta_s_of_c(pr.c_max_tilde * 0.999))
    assert o.gamma_plus >= 0


@settings(max_examples=8, deadline=None)
@given(st.floats(min_value=4000.0, max_value=12000.0), st.floats(min_value=0.6, max_value=2.5))
def test_random_parameters_solution_in_bracket(T_a, ratio):
    p = reference_params(T_a=T_a, c_p=1200.0 * ratio)
    w = solve_wave(p, profile=False)
    pr = w.problem
    assert pr.c_max_tilde < w.c_tilde < pr.c_min_tilde
    assert abs(w.xi_residual) <= 1e-8 * abs(pr.c_max_tilde)
