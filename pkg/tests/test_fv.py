import dataclasses

import numpy as np
import pytest

from propwave import ConfigurationError, ConvergenceError, DomainError, reference_params
from propwave.fv import (FvMesh, FvOptions, FvState, Layout, Sources, enthalpy_deviation,
                         equidistributed_mesh, initial_guess, interpolate_state, newton_solve,
                         pressure_drop_diagnostic, pseudo_transient, reaction_integral_fv,
                         refine_mesh, residual, solve_fv, solve_on_mesh)
from propwave.fv.core import Geometry, Scales
from propwave.model import R_GAS, derive, flame_temperature, q_pyro
from propwave.shooting import solve_wave


def uniform_mesh(Ls, Lg, ns, ng):
    faces = np.concatenate([np.linspace(-Ls, 0.0, ns + 1), np.linspace(0.0, Lg, ng + 1)[1:]])
    return FvMesh(faces, ns)


def eval_residual(x, mesh, p, scheme="centred", sources=None, parts=False):
    return residual(x, Geometry.of(mesh), Layout.of(mesh), p, scheme, Scales.of(p), sources, parts)


# -- mesh and layout -----------------------------------------------------------------

def test_mesh_validation():
    with pytest.raises(DomainError):
        FvMesh(np.array([-2.0, -1.0, 0.5, 1.0, 2.0]), 2)
    with pytest.raises(DomainError):
        FvMesh(np.array([-2.0, -1.0, 0.0, 1.0]), 2)
    with pytest.raises(DomainError):
        FvMesh(np.array([-2.0, -1.0, 0.0, 0.0, 1.0, 2.0]), 2)
    m = uniform_mesh(1.0, 2.0, 4, 8)
    assert m.n_cells == 12 and m.n_gas == 8
    assert m.solid_length == 1.0 and m.gas_length == 2.0


def test_layout_roundtrip():
    lay = Layout(3, 4)
    T = np.arange(7.0) + 300
    Y = np.linspace(1, 0, 4)
    x = lay.pack(T, Y, 555.0, -1e-3)
    assert x.size == lay.n == 3 + 1 + 8 + 1
    T2, Y2, Ts, c = lay.unpack(x)
    assert np.array_equal(T, T2) and np.array_equal(Y, Y2) and Ts == 555.0 and c == -1e-3


def test_options_validation():
    with pytest.raises(ConfigurationError):
        FvOptions(scheme="quick")
    with pytest.raises(ConfigurationError):
        FvOptions(refine_dT=0.0)
    with pytest.raises(ConfigurationError):
        FvOptions(damping_min=2.0)


# -- residual --------------------------------------------------------------------------

def test_uniform_state_has_zero_interior_residual():
    p = reference_params()
    mesh = uniform_mesh(1e-3, 1e-3, 10, 10)
    lay = Layout.of(mesh)
    x = lay.pack(np.full(20, p.T0), np.ones(10), p.T0, 0.0)
    parts = eval_residual(x, mesh, p, sources=Sources(no_reaction=True), parts=True)
    scale = p.lambda_s * p.T0 / np.min(mesh.widths)
    for key in ("r_sol", "r_gas", "r_spec"):
        assert np.max(np.abs(parts[key])) <= 1e-14 * scale
    assert abs(parts["r_int"]) <= 1e-14 * scale


@pytest.mark.parametrize("scheme", ["upwind", "hybrid", "centred"])
def test_gas_energy_residual_telescopes(scheme):
    rng = np.random.default_rng(3)
    p = reference_params()
    mesh = uniform_mesh(1e-3, 2e-3, 15, 25)
    lay = Layout.of(mesh)
    x = lay.pack(rng.uniform(400, 3000, 40), rng.uniform(0, 1, 25), 800.0, -2e-3)
    parts = eval_residual(x, mesh, p, scheme, parts=True)
    Q_mol = -p.nu * p.M * p.Q_g
    vol = parts["omega"] * mesh.widths[mesh.n_solid:]
    lhs = np.sum(parts["r_gas"]) + Q_mol * np.sum(vol)
    G = parts["G"]
    assert lhs == pytest.approx(G[-1] - G[0], rel=1e-12, abs=1e-12 * np.max(np.abs(G)))
    F = parts["F"]
    assert np.sum(parts["r_sol"]) == pytest.approx(F[-1] - F[0], rel=1e-12,
                                                   abs=1e-12 * np.max(np.abs(F)))


def test_exact_solid_profile_second_order():
    p = reference_params()
    c = -1.8667e-3
    mdot = -p.rho_s * c
    delta = p.lambda_s / (mdot * p.c_s)
    Ts = 826.0
    T_ex = lambda x: p.T0 + (Ts - p.T0) * np.exp(x / delta)
    errs = []
    for n in (40, 80, 160, 320):
        mesh = uniform_mesh(10 * delta, 10 * delta, n, n)
        lay = Layout.of(mesh)
        xc = mesh.centers
        x = lay.pack(np.concatenate([T_ex(xc[:n]), np.full(n, 2000.0)]), np.full(n, 0.5), Ts, c)
        parts = eval_residual(x, mesh, p, "centred", Sources(T_left=T_ex(-10 * delta)), parts=True)
        errs.append(np.max(np.abs(parts["r_sol"])))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.8), orders


def _manufactured(p, mesh, c):
    """Sources that make smooth tanh profiles an exact solution of the continuous problem."""
    from numpy.polynomial.legendre import leggauss

    mdot = -p.rho_s * c
    w, A = 2e-4, 1500.0
    T = lambda x: p.T0 + 0.5 * A * (1 + np.tanh(x / w + 0.2))
    dT = lambda x: 0.5 * A / w / np.cosh(x / w + 0.2) ** 2
    Y = lambda x: 0.6 - 0.5 * np.tanh(x / w)
    dY = lambda x: -0.5 / w / np.cosh(x / w) ** 2
    rhoD = p.lambda_g / (p.c_p * p.Le)
    om = lambda x: p.A_reac * p.P / R_GAS * Y(x) * np.exp(-p.T_a / T(x))
    f = mesh.faces
    ns = mesh.n_solid
    F = mdot * p.c_s * T(f[:ns + 1]) - p.lambda_s * dT(f[:ns + 1])
    fg = f[ns:]
    G = mdot * p.c_p * T(fg) - p.lambda_g * dT(fg)
    H = mdot * Y(fg) - rhoD * dY(fg)
    H[0] = mdot
    gx, gw = leggauss(4)
    a, b = fg[:-1], fg[1:]
    pts = 0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * gx[None, :]
    int_om = np.sum(om(pts) * gw[None, :], axis=1) * 0.5 * (b - a)
    Q_mol = -p.nu * p.M * p.Q_g
    energy = np.concatenate([np.diff(F), np.diff(G) - Q_mol * int_om])
    species = np.diff(H) - p.nu * p.M * int_om
    interface = p.lambda_s * dT(0.0) - p.lambda_g * dT(0.0) - mdot * q_pyro(T(0.0), p)
    src = Sources(energy=energy, species=species, interface=interface, c_fixed=c,
                  T_left=float(T(f[0])), dTdx_right=float(dT(f[-1])), dYdx_right=float(dY(f[-1])))
    return src, T, Y


@pytest.mark.parametrize("scheme,min_order", [("centred", 1.9), ("hybrid", 1.9), ("upwind", 0.9)])
def test_manufactured_solution_order(scheme, min_order):
    # slow kinetics keep the manufactured state well conditioned (no thermal runaway)
    p = reference_params(Le=2.0, A_reac=5.0)
    c = -2e-3
    opts = FvOptions(scheme=scheme)
    errs = []
    for n in (40, 80, 160, 320):
        mesh = uniform_mesh(3e-3, 3e-3, n, n)
        src, T, Y = _manufactured(p, mesh, c)
        xc = mesh.centers
        st0 = FvState(mesh, T(xc), Y(xc[n:]), float(T(0.0)), c)
        st = newton_solve(st0, mesh, p, opts, src)
        assert st.converged, st.message
        err = max(np.max(np.abs(st.T - T(xc))) / 1500.0, np.max(np.abs(st.Y - Y(xc[n:]))),
                  abs(st.T_s - T(0.0)) / 1500.0)
        errs.append(err)
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert orders[-1] >= min_order, (errs, orders)


# -- Newton and pseudo-transient ---------------------------------------------------------

def test_newton_from_shooter_is_fast(ref_fv):
    first = ref_fv.history[0]
    assert first["converged"] and first["newton_iterations"] <= 10


def test_newton_quadratic_convergence(ref_params):
    # start from a neighbouring wave so that several iterations are needed
    w = solve_wave(ref_params.with_(T_a=7000.0))
    from propwave.fv import initial_from_wave
    mesh, st0 = initial_from_wave(w, ref_params, FvOptions())
    st = newton_solve(st0, mesh, ref_params, FvOptions(newton_tol=1e-12))
    assert st.converged
    n = np.array(st.step_norms)
    assert n.size >= 3
    for a, b in zip(n[-3:-1], n[-2:]):
        if a < 1e-2:
            assert b <= 10 * a * a + 1e-13, n


def test_crude_initial_data_never_panics(ref_params):
    mesh = uniform_mesh(2e-4, 2e-3, 6, 12)
    T = np.linspace(ref_params.T0, 2500.0, 18)
    st0 = FvState(mesh, T, np.linspace(1.0, 0.0, 12), 900.0, -1e-3)
    st = newton_solve(st0, mesh, ref_params, FvOptions(max_newton=15))
    assert st.converged or st.message
    st2 = solve_on_mesh(st0, ref_params, FvOptions(max_newton=15, pt_max_steps=40))
    assert st2.converged or "pseudo-transient" in st2.message


def test_pseudo_transient_zero_steps_from_solution(ref_fv, ref_params):
    st = pseudo_transient(ref_fv.state, ref_fv.mesh, ref_params, ref_fv.options)
    assert st.converged and st.n_pseudo == 0
    assert st.c == pytest.approx(ref_fv.c, rel=1e-12)


def test_pseudo_transient_path_independence(ref_fv, ref_params):
    opts = ref_fv.options
    _, crude = initial_guess(ref_params, opts)
    st0 = interpolate_state(crude, ref_fv.mesh)
    st = pseudo_transient(st0, ref_fv.mesh, ref_params, opts)
    assert st.converged
    assert st.c == pytest.approx(ref_fv.c, rel=1e-9)
    assert st.T_s == pytest.approx(ref_fv.T_s, rel=1e-10)


def test_crude_start_full_solve(ref_params, ref_wave):
    sol = solve_fv(ref_params, FvOptions())
    assert sol.c == pytest.approx(ref_wave.c, rel=1e-6)


# -- refinement ---------------------------------------------------------------------------

def test_refine_unchanged_for_huge_threshold(ref_fv):
    opts = ref_fv.options.with_(refine_dT=1e5)
    assert refine_mesh(ref_fv.state, ref_fv.mesh, opts) is ref_fv.mesh


def test_refine_fixed_point(ref_fv, ref_params):
    assert refine_mesh(ref_fv.state, ref_fv.mesh, ref_fv.options) is ref_fv.mesh
    st = newton_solve(ref_fv.state, ref_fv.mesh, ref_params, ref_fv.options)
    assert abs(st.T_s - ref_fv.T_s) / ref_fv.T_s < 1e-9


def test_refine_inserts_cells_and_keeps_interface(ref_fv):
    opts = ref_fv.options.with_(refine_dT=0.3)
    m2 = refine_mesh(ref_fv.state, ref_fv.mesh, opts)
    assert m2.n_cells > ref_fv.mesh.n_cells
    assert m2.faces[m2.n_solid] == 0.0
    w = m2.widths
    assert np.max(np.maximum(w[1:] / w[:-1], w[:-1] / w[1:])) <= opts.max_ratio * (1 + 1e-12)


def test_refine_extends_domain_when_boundary_gradient_large(ref_fv):
    st = ref_fv.state
    mesh = ref_fv.mesh
    T = st.T.copy()
    T[0] = T[1] - 50.0        # artificial steep left boundary
    fake = FvState(mesh, T, st.Y, st.T_s, st.c)
    m2 = refine_mesh(fake, mesh, ref_fv.options.with_(refine_dT=1e5))
    assert m2.solid_length > mesh.solid_length


def test_refine_cell_cap(ref_fv):
    with pytest.raises(ConvergenceError):
        refine_mesh(ref_fv.state, ref_fv.mesh, ref_fv.options.with_(refine_dT=0.01, max_cells=5000))


def test_equidistribution_counts_grow(ref_wave, ref_params):
    prof = ref_wave.profiles
    counts = [equidistributed_mesh(prof.x, prof.T, thr, 0.02, 0.02).n_cells for thr in (50, 5, 0.5, 0.05)]
    assert all(a < b for a, b in zip(counts, counts[1:]))


# -- converged-solution properties ---------------------------------------------------------

def test_reference_agreement_and_bracket(ref_fv, ref_wave, ref_params):
    assert abs(ref_fv.c - ref_wave.c) / abs(ref_fv.c) <= 1e-6
    d = derive(ref_params)
    assert d.c_max < ref_fv.c < d.c_min


def test_profile_monotone_and_limits(ref_fv, ref_params):
    T = np.concatenate([ref_fv.state.T[:ref_fv.mesh.n_solid], [ref_fv.T_s],
                        ref_fv.state.T[ref_fv.mesh.n_solid:]])
    assert np.all(np.diff(T) > 0)
    T_f = flame_temperature(ref_params)
    assert abs(T[0] - ref_params.T0) < 1e-6 * (T_f - ref_params.T0)
    assert abs(T[-1] - T_f) < 1e-6 * (T_f - ref_params.T0)


def test_enthalpy_and_reaction_integral(ref_fv, ref_params):
    assert enthalpy_deviation(ref_fv) < 1e-8
    expect = ref_fv.mass_flux / (-ref_params.nu * ref_params.M)
    assert reaction_integral_fv(ref_fv) == pytest.approx(expect, rel=1e-4)


def test_pressure_drop_diagnostic(ref_fv, ref_params):
    dp = pressure_drop_diagnostic(ref_fv)
    assert dp < 0 and abs(dp) / ref_params.P < 1e-3
    assert 0.1 < abs(dp) < 100.0
    zero = dataclasses.replace(ref_fv, mass_flux=0.0)
    assert pressure_drop_diagnostic(zero) == 0.0
    double = dataclasses.replace(ref_fv, mass_flux=2 * ref_fv.mass_flux)
    assert pressure_drop_diagnostic(double) == pytest.approx(2 * dp, rel=1e-14)


def test_lewis_three_differs_within_twenty_percent(ref_params, ref_wave):
    sol = solve_fv(ref_params.with_(Le=3.0), FvOptions(), initial=ref_wave)
    err = abs(ref_wave.c - sol.c) / abs(sol.c)
    assert 1e-3 < err <= 0.20


def test_heat_capacity_ratio_matches_shooter():
    p = reference_params(c_p=2400.0)
    w = solve_wave(p)
    sol = solve_fv(p, FvOptions(refine_dT=0.5, init_dT=0.4), initial=w)
    assert abs(sol.c - w.c) / abs(sol.c) < 1e-6


def test_meta_contents(ref_fv):
    m = ref_fv.meta()
    assert m["n_cells"] == ref_fv.n_cells and m["scheme"] == "hybrid"
    assert m["rounds"][-1]["converged"]
