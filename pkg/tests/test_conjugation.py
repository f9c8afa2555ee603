import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import gaussian_fbi, gaussian_weighted_integral
from transonic_lab.conjugation import (ProblemFrame, boundary_integrals, build_fields, conservation_residual,
                                       conjugator_pointwise_residual, diagonalize, diagonalizer_fields,
                                       est_basic_check, gaussian_decay_exponent, iii_bound_factor, re_square,
                                       solve_B, solve_zeta, u_recovery_integrals)
from transonic_lab.errors import FrameTooLargeError
from transonic_lab.gasdyn import GasModel
from transonic_lab.microlocal import Datum1D, load_datum
from transonic_lab.series import BivariateSeries, ck_solve, mat_const

MODEL = GasModel()
Z = -0.05j


def _const_D(l1, l2, N=6):
    c = [BivariateSeries.constant(l, N) for l in (l1, l2)]
    z = BivariateSeries.zeros(N)
    return [[c[0], z], [z, c[1]]]


def test_diagonalizer_constant_state():
    d = diagonalize(ck_solve(([0.0], [0.0]), MODEL, 6))
    S0 = np.array([[d.S[i][j].coeffs[0, 0] for j in range(2)] for i in range(2)])
    D0 = np.array([[d.D[i][j].coeffs[0, 0] for j in range(2)] for i in range(2)])
    assert np.allclose(D0, np.diag([1j, -1j]), atol=1e-15)
    assert np.allclose(S0, np.array([[1, 1], [1j, -1j]]) / math.sqrt(2), atol=1e-15)
    for i in range(2):
        for j in range(2):
            c = d.S[i][j].coeffs.copy()
            c[0, 0] = 0
            assert np.all(c == 0)
    assert d.residual() <= 1e-15


def test_diagonalizer_variable_state():
    d = diagonalize(ck_solve(([0.0], [0.3, 0.1]), MODEL, 8))
    assert d.residual() <= 1e-9
    assert d.inverse_residual() <= 1e-9
    assert d.lambdas[0].coeffs[0, 0].imag > 0


def test_diagonalizer_supersonic_is_real():
    d = diagonalize(ck_solve(([0.0], [1.5]), MODEL, 4))
    lam = [l.coeffs[0, 0] for l in d.lambdas]
    assert all(abs(l.imag) < 1e-14 for l in lam) and lam[0].real > lam[1].real
    assert d.residual() <= 1e-12


def test_frame_too_large():
    sol = ck_solve(([0.0], [0.3, 0.1]), MODEL, 4)
    with pytest.raises(FrameTooLargeError):
        diagonalizer_fields(sol, ProblemFrame(T1=0.04, r0=14.0, R=1.0))


def test_frame_validation():
    with pytest.raises(ValueError):
        ProblemFrame(T1=0.1, r0=1.0, R=0.25)  # T1 - T0 > R^2
    with pytest.raises(ValueError):
        ProblemFrame(T1=0.01, r0=1.0, R=0.6)
    with pytest.raises(ValueError):
        ProblemFrame(T0=1.0, T1=1.0)


def test_zeta_constant():
    N = 6
    zp = solve_zeta(_const_D(1j, -1j, N))
    for zeta, sgn in ((zp.zeta1, -1j), (zp.zeta2, 1j)):
        ref = np.zeros((N + 1, N + 1), complex)
        ref[0, 1] = 1.0
        ref[1, 0] = sgn
        assert np.array_equal(zeta.coeffs, ref)


def test_zeta_variable_first_order():
    N = 7
    lam = BivariateSeries.from_x([1j, 0.1j], N)
    z = BivariateSeries.zeros(N)
    zp = solve_zeta([[lam, z], [z, lam.conj()]])
    expect = np.zeros(N, complex)
    expect[:2] = [-1j, -0.1j]
    assert np.array_equal(zp.zeta1.time_row(1)[:N], expect)
    assert zp.initial_defect() == 0.0
    assert zp.first_order_defect() == 0.0
    assert zp.residual() <= 1e-14
    for i in range(2):
        assert np.all(zp.remainder(i).coeffs[0] == 0)


def test_zeta_manufactured(manufactured_runs):
    frame, runs = manufactured_runs
    zp = runs[9].zeta
    assert zp.initial_defect() == 0.0
    assert zp.first_order_defect() <= 1e-15
    assert zp.residual() <= 1e-12


def test_sign_structure_initial_line(manufactured_runs):
    frame, runs = manufactured_runs
    x = np.linspace(frame.x0 - frame.R, frame.x0 + frame.R, 41)
    for zeta in (runs[9].zeta.zeta1, runs[9].zeta.zeta2):
        vals = zeta.evaluate(np.full_like(x, frame.T0), x)
        rs = re_square(vals, frame.x0)
        assert np.allclose(rs, (x - frame.x0) ** 2, atol=1e-15)
        assert np.all(rs >= 0)


@given(st.complex_numbers(max_magnitude=10), st.complex_numbers(max_magnitude=10))
def test_re_square(z, w):
    assert re_square(z, w) == pytest.approx(((z - w) ** 2).real, abs=1e-10)


def test_B_constant_is_identity():
    N = 6
    S = mat_const(np.array([[1, 1], [1j, -1j]]) / math.sqrt(2), N)
    L = mat_const(np.array([[1, -1j], [1, 1j]]) / math.sqrt(2), N)
    cf = solve_B(S, L, _const_D(1j, -1j, N))
    for i in range(2):
        for j in range(2):
            ref = np.zeros((N + 1, N + 1), complex)
            ref[0, 0] = float(i == j)
            assert np.array_equal(cf.B[i][j].coeffs, ref)


def test_B_linearity(manufactured_runs):
    frame, runs = manufactured_runs
    d = runs[9].diag
    one = solve_B(d.S, d.S_inv, d.D)
    two = solve_B(d.S, d.S_inv, d.D, [[2.0, 0.0], [0.0, 2.0]])
    for i in range(2):
        for j in range(2):
            assert np.array_equal(two.B[i][j].coeffs, 2.0 * one.B[i][j].coeffs)


def test_B_residual(manufactured_runs):
    frame, runs = manufactured_runs
    f = runs[9]
    assert f.conj.residual(f.diag) <= 1e-9
    assert conjugator_pointwise_residual(f, frame) <= 1e-9


def test_conservation_constant_setup():
    frame = ProblemFrame(T1=0.04, r0=1.0, R=0.25)
    f = build_fields(ck_solve(([0.0], [0.3]), MODEL, 6), frame)
    r = conservation_residual(f, frame, 16.0, Z)
    assert r.defect <= 1e-13 * max(1.0, r.scale)
    assert r.source == 0.0


def test_conservation_variable(manufactured_runs):
    frame, runs = manufactured_runs
    assert conservation_residual(runs[9], frame, 16.0, frame.x0 + Z).defect <= 1e-8


def test_conservation_detects_corrupted_B(manufactured_runs):
    frame, runs = manufactured_runs
    f = runs[9]
    for pos in ((1, 0), (0, 1)):
        B = [list(row) for row in f.conj.B]
        c = B[0][0].coeffs.copy()
        c[pos] += 1e-3
        B[0][0] = BivariateSeries(c, frame.T0, frame.x0)
        assert conservation_residual(f, frame, 16.0, frame.x0 + Z, B_override=B).defect >= 1e-4


def test_identity_defects_decrease_with_N(manufactured_runs):
    frame, runs = manufactured_runs
    seq = {"conservation": [], "B": [], "boundary": [], "u": []}
    for N in (6, 9, 12):
        f = runs[N]
        seq["conservation"].append(conservation_residual(f, frame, 16.0, Z).defect)
        seq["B"].append(conjugator_pointwise_residual(f, frame))
        seq["boundary"].append(boundary_integrals(f, frame, 1.0, Z).defect)
        seq["u"].append(u_recovery_integrals(f, frame, 1.0, Z).defect)
    for name, vals in seq.items():
        assert vals[0] > vals[1] > vals[2], (name, vals)


def test_boundary_zero_field():
    frame = ProblemFrame(T1=0.04, r0=1.0, R=0.25)
    f = build_fields(ck_solve(([0.0], [0.0]), MODEL, 6), frame)
    rep = boundary_integrals(f, frame, 4.0, Z, s_values=(0.02,))
    for arr in (rep.lhs, rep.I, rep.II, rep.IV, rep.III[0.02]):
        assert np.all(arr == 0)
    ur = u_recovery_integrals(f, frame, 4.0, Z)
    for arr in (ur.lhs, ur.i, ur.ii, ur.iii):
        assert np.all(arr == 0)


def _constant_gaussian_setup():
    # chi' sits where exp(-mu (x - z)^2) < e^-50, so the integrals are pure Gaussians
    frame = ProblemFrame(T1=0.01, r0=1.0, R=0.45)
    f = build_fields(ck_solve(([0.0], [0.3]), MODEL, 6), frame)
    return frame, f, 1000.0, 0.01 + 0.002j


def test_boundary_constant_gaussian():
    frame, f, mu, z = _constant_gaussian_setup()
    rep = boundary_integrals(f, frame, mu, z)
    tau = frame.T1 - frame.T0
    v = f.v[0].coeffs[0, 0], f.v[1].coeffs[0, 0]
    for i in range(2):
        lam = f.diag.lambdas[i].coeffs[0, 0]
        for t, got in ((0.0, rep.lhs[i]), (tau, rep.I[i])):
            c = z + lam * t
            ref = v[i] * gaussian_weighted_integral(mu, 2 * mu * c, -mu * c * c)
            assert abs(got - ref) <= 1e-8 * abs(ref)
        assert abs(rep.II[i]) <= 1e-8 * abs(rep.lhs[i])
    assert rep.defect <= 1e-8


def test_u_recovery_constant_gaussian():
    frame, f, mu, z = _constant_gaussian_setup()
    rep = u_recovery_integrals(f, frame, mu, z)
    u = np.array([0.0, 0.3])
    ref = gaussian_weighted_integral(mu, 2 * mu * z, -mu * z * z)
    assert np.allclose(rep.i, u * ref, rtol=0, atol=1e-8 * abs(ref))
    assert np.max(np.abs(rep.ii)) <= 1e-8 * abs(ref)
    assert np.max(np.abs(rep.i)) > 1e3 * np.max(np.abs(rep.iii))
    assert rep.defect <= 1e-8


def test_integrated_identities_manufactured(manufactured_runs):
    frame, runs = manufactured_runs
    b = boundary_integrals(runs[9], frame, 1.0, Z, s_values=(0.0, 0.2, 0.4))
    assert b.defect <= 1e-8
    assert np.all(b.III[0.0] == 0)
    assert np.allclose(b.III[0.4], b.II, atol=1e-12)
    # the commutator term is what closes the identity on variable coefficients
    assert b.literal_defect > 1e3 * b.defect
    assert u_recovery_integrals(runs[9], frame, 1.0, Z).defect <= 1e-8
    with pytest.raises(ValueError):
        boundary_integrals(runs[9], frame, 1.0, Z, s_values=(1.0,))


def test_iii_bound_factor_linear_in_mu(manufactured_runs):
    frame, runs = manufactured_runs
    f = runs[6]
    vals = [iii_bound_factor(f, frame, mu, Z) for mu in (1.0, 2.0, 4.0, 8.0)]
    for a, b in zip(vals, vals[1:]):
        assert a < b <= 2.0 * a
    # affine: equal increments per unit mu
    assert (vals[3] - vals[2]) / 4.0 == pytest.approx((vals[1] - vals[0]) / 1.0, rel=1e-12)


def test_est_basic_gaussian_injection():
    z = 0.1 - 0.2j
    mu = np.geomspace(1.0, 256.0, 16)
    rep = est_basic_check([load_datum("gaussian")], [z], mu, disc_radius=0.0)
    expect = gaussian_decay_exponent(z, mu)
    assert expect > 0
    assert abs(rep.eps_hat[0] - expect) <= 0.05 * expect


def test_est_basic_zero_field():
    zero = Datum1D(lambda x: 0 * x, (-1.0, 1.0))
    rep = est_basic_check([zero], [-0.3j])
    c = rep.components[0]
    assert "zero-transform" in c.flags and math.isnan(c.eps_hat) and not c.positive


def test_est_basic_manufactured(manufactured_runs):
    from transonic_lab.conjugation import EST_BASIC_FLOOR, est_basic_centers, initial_line_data
    frame, runs = manufactured_runs
    f = runs[9]
    rep = est_basic_check(initial_line_data(f, frame), est_basic_centers(f, frame))
    assert all(e >= 1e-3 and e > EST_BASIC_FLOOR for e in rep.eps_hat)


def test_est_basic_grid_validation():
    with pytest.raises(ValueError):
        est_basic_check([load_datum("gaussian")], [0j], [1.0, 2.0, 3.0])
