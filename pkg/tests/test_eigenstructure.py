import numpy as np
import pytest
from hypothesis import given, strategies as st

from transonic_lab.eigenstructure import eigen_decompose, quadratic_eigenvalues, track_eigenpairs
from transonic_lab.errors import MultiplicityError
from transonic_lab.gasdyn import FlowState, GasModel, flux_matrix


def test_rotation_generator():
    dec = eigen_decompose(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    assert dec.lambda_plus == pytest.approx(1j)
    assert dec.lambda_minus == pytest.approx(-1j)
    v = dec.S[:, 0]
    np.testing.assert_allclose(v, np.array([1, 1j]) / np.sqrt(2), atol=1e-15)


def test_flux_matrix_spectrum():
    A = flux_matrix(GasModel(1.0 + 1e-12, 1.0), FlowState(0.0, 0.5))
    dec = eigen_decompose(A)
    assert dec.lambda_plus == pytest.approx(1j * np.sqrt(0.75), abs=1e-10)
    assert dec.lambda_minus == pytest.approx(-1j * 0.866025, abs=1e-6)


def test_diagonal_matrix():
    dec = eigen_decompose(np.diag([2.0, 3.0]))
    assert sorted([dec.lambda_plus.real, dec.lambda_minus.real]) == [2.0, 3.0]
    np.testing.assert_allclose(np.abs(dec.S), np.array([[0, 1], [1, 0]]), atol=1e-15)


def test_defective_rejected():
    with pytest.raises(MultiplicityError):
        eigen_decompose(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_shape_checked():
    with pytest.raises(ValueError):
        eigen_decompose(np.eye(3))


def test_reconstruction_random_batch(rng):
    # 10^4 random non-defective matrices, compared with numpy's LAPACK eigenvalues
    fails = 0
    for _ in range(10_000):
        A = rng.normal(size=(2, 2)) + (1j * rng.normal(size=(2, 2)) if rng.random() < 0.3 else 0.0)
        lp, lm, disc = quadratic_eigenvalues(A)
        if abs(disc) < 1e-6 * np.max(np.abs(A)) ** 2:
            continue
        dec = eigen_decompose(A)
        rec = dec.S @ dec.D @ dec.S_inv
        if np.max(np.abs(rec - A)) > 1e-9 * np.max(np.abs(A)):
            fails += 1
        ref = np.sort_complex(np.linalg.eigvals(A))
        got = np.sort_complex(dec.eigenvalues)
        assert np.max(np.abs(ref - got)) <= 1e-9 * max(1.0, np.max(np.abs(A)))
    assert fails == 0


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_invariants(a, b, c, d):
    A = np.array([[a, b], [c, d]])
    lp, lm, disc = quadratic_eigenvalues(A)
    scale = max(np.max(np.abs(A)), 1e-3)
    if abs(disc) <= 1e-6 * scale**2:
        return
    dec = eigen_decompose(A)
    assert np.max(np.abs(A @ dec.S - dec.S @ dec.D)) <= 1e-10 * np.max(np.abs(A)) * 10
    assert np.max(np.abs(dec.S @ dec.S_inv - np.eye(2))) <= 1e-10 * np.linalg.cond(dec.S)
    if disc.real < 0:
        assert dec.lambda_minus == pytest.approx(np.conj(dec.lambda_plus), abs=1e-12 * scale)
        assert dec.lambda_plus.imag > 0
    for k in range(2):
        v = dec.S[:, k]
        assert np.linalg.norm(v) == pytest.approx(1.0)
        first = v[0] if abs(v[0]) > 1e-14 else v[1]
        assert abs(first.imag) < 1e-14 and first.real > 0


def test_track_constant_path():
    ts = np.linspace(0, 1, 8)
    mats = np.repeat(np.array([[[0.0, 1.0], [-2.0, 0.0]]]), 8, axis=0)
    tr = track_eigenpairs(ts, mats)
    for br in tr.branches:
        assert np.all(br.values == br.values[0])
        np.testing.assert_allclose(br.vectors, br.vectors[:1].repeat(8, axis=0), atol=1e-15)
    assert tr.clusters == []


def test_track_closed_form_branch():
    ts = np.linspace(0.0, 0.5, 64)
    mats = np.array([[[0.0, 1.0], [-(1 - t), 0.0]] for t in ts])
    tr = track_eigenpairs(ts, mats)
    br = tr.branches[0]
    assert np.max(np.abs(br.values - 1j * np.sqrt(1 - ts))) <= 1e-10
    # branch continuity with L = max |d lambda/dt| = 1/(2 sqrt(0.5))
    L = 1.0 / (2 * np.sqrt(0.5))
    assert np.max(np.abs(np.diff(br.values))) <= L * (ts[1] - ts[0]) * (1 + 1e-9)
    # phase coherence between consecutive eigenvectors
    ov = np.einsum("ij,ij->i", br.vectors[:-1].conj(), br.vectors[1:])
    assert np.all(ov.real >= 0) and np.allclose(ov.imag, 0, atol=1e-12)


def test_track_cluster_event():
    ts = np.linspace(-0.5, 0.5, 11)
    mats = np.array([[[t, 1.0], [0.0, -t]] for t in ts])
    tr = track_eigenpairs(ts, mats)
    np.testing.assert_allclose(tr.cluster_parameters, [0.0], atol=1e-15)
    # branches follow lambda = +t and lambda = -t straight through the crossing
    b0 = tr.branches[0].values.real
    assert np.allclose(np.abs(np.diff(b0)), 0.1, atol=1e-12)


def test_branch_csv(tmp_path):
    ts = np.linspace(0, 1, 3)
    mats = np.array([[[0.0, 1.0], [-1.0 - t, 0.0]] for t in ts])
    tr = track_eigenpairs(ts, mats)
    p = tmp_path / "b.csv"
    tr.branches[0].to_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "t,re,im" and len(lines) == 4
