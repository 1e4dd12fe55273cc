import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spintomo.errors import LengthMismatchError
from spintomo.fitting import RegressionModel
from spintomo.pauli import density_from_stokes
from spintomo.reconstruct import compare, fidelity, frobenius_distance, physicality_check, reconstruct_density

UP = np.array([[1, 0], [0, 0]], dtype=complex)


def constant_model(s):
    return RegressionModel.from_monomial({l: [v] for l, v in enumerate(s)}, t_max=1.0)


def test_reconstruct_examples():
    np.testing.assert_allclose(reconstruct_density(constant_model([1, 0, 0, 1]), 0.5), UP, atol=1e-15)
    np.testing.assert_allclose(reconstruct_density(constant_model([0.5, 0, 0, 0]), 0.2), 0.25 * np.eye(2), atol=1e-15)


@settings(max_examples=30)
@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.floats(0, 1))
def test_reconstruction_hermitian_with_trace_s0(s, t):
    model = RegressionModel.from_monomial({l: [s[l], 0.1 * l] for l in range(4)}, t_max=1.0)
    rho = reconstruct_density(model, t)
    np.testing.assert_array_equal(rho, rho.conj().T)
    assert np.trace(rho).real == pytest.approx(model.fits[0](t), abs=1e-14)


def test_stacked_reconstruction_shape():
    rho = reconstruct_density(constant_model([1, 0, 0, 1]), np.linspace(0, 1, 7))
    assert rho.shape == (7, 2, 2)


def test_compare_identical_series():
    times = np.linspace(0, 1, 5)
    series = np.stack([0.9 * UP, 0.5 * np.eye(2) / 2 * 2, UP, 0.01 * UP, np.eye(2) / 2])
    rep = compare(times, series, series)
    assert np.all(rep.frobenius == 0)
    fid = rep.fidelity[np.isfinite(rep.fidelity)]
    np.testing.assert_allclose(fid, 1.0, atol=1e-12)
    # trace 0.01 is below the fidelity threshold
    assert np.isnan(rep.fidelity[3])


def test_compare_mixed_vs_pure():
    rep = compare([0.0], [np.eye(2) / 2], [UP])
    assert rep.fidelity[0] == pytest.approx(0.5, abs=1e-12)
    assert rep.frobenius[0] == pytest.approx(1 / math.sqrt(2), abs=1e-15)


def test_compare_grid_mismatch():
    with pytest.raises(LengthMismatchError):
        compare([0.0, 1.0], [UP, UP], [UP])
    with pytest.raises(LengthMismatchError):
        compare([0.0], [UP], [UP], times_ref=[0.5])


def test_fidelity_bounded_for_non_psd_estimate():
    rho_hat = density_from_stokes([1, 0.1, 0, 1.05])
    f = fidelity(rho_hat, UP)
    assert 0 <= f <= 1 + 1e-9


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_fidelity_symmetric_and_bounded(seed):
    rng = np.random.default_rng(seed)
    mats = []
    for _ in range(2):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        r = a @ a.conj().T
        mats.append(r / np.trace(r).real)
    f1, f2 = fidelity(*mats), fidelity(*mats[::-1])
    assert 0 <= f1 <= 1 + 1e-9
    assert f1 == pytest.approx(f2, abs=1e-9)
    # closed form for qubits
    a, b = mats
    closed = np.trace(a @ b).real + 2 * math.sqrt(max(np.linalg.det(a).real, 0) * max(np.linalg.det(b).real, 0))
    assert f1 == pytest.approx(closed, abs=1e-9)


def test_frobenius_distance():
    assert frobenius_distance(UP, np.zeros((2, 2))) == 1.0


def test_physicality_pure_state_unchanged():
    out, diag = physicality_check(UP, project=True)
    assert out is UP or np.array_equal(out, UP)
    np.testing.assert_allclose(diag.eigenvalues, [1, 0], atol=1e-15)
    assert diag.is_psd and not diag.projected


def test_physicality_projection():
    rho = density_from_stokes([1, 0, 0, 1.2])
    same, diag = physicality_check(rho)
    np.testing.assert_array_equal(same, rho)
    np.testing.assert_allclose(diag.eigenvalues, [1.1, -0.1], atol=1e-15)
    assert not diag.is_psd and not diag.projected
    proj, diag = physicality_check(rho, project=True)
    np.testing.assert_allclose(proj, UP, atol=1e-15)
    assert np.trace(proj).real == pytest.approx(1.0)
    assert diag.projected


def test_physicality_empty_matrix():
    z = np.zeros((2, 2), dtype=complex)
    out, diag = physicality_check(z, project=True)
    assert np.array_equal(out, z) and diag.empty and not diag.projected


@settings(max_examples=50)
@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3), st.floats(0.1, 1.0))
def test_projection_is_psd_with_same_trace(r, s0):
    rho = density_from_stokes([s0, *r])
    proj, _ = physicality_check(rho, project=True)
    assert np.linalg.eigvalsh(proj).min() >= -1e-12
    assert np.trace(proj).real == pytest.approx(s0, abs=1e-12)


def test_closed_consistency_reported():
    times = np.array([0.0, 1.0])
    ref = np.stack([np.exp(-0.1 * t) * UP for t in times])
    closed = np.stack([UP, UP])
    rep = compare(times, ref, ref, closed, gamma0=0.1)
    assert rep.closed_consistency == pytest.approx(0, abs=1e-15)
    assert rep.summary()["max_closed_vs_scaled_open"] == rep.closed_consistency
