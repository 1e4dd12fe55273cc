import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spintomo.pauli import (
    SpinDirection,
    density_from_stokes,
    n_dot_sigma,
    pauli,
    projector_expectation,
    spin_state,
    stokes_from_density,
)

UP = np.array([[1, 0], [0, 0]], dtype=complex)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def hermitian(draw):
    a, d, re, im = (draw(finite) for _ in range(4))
    return np.array([[a, re + 1j * im], [re - 1j * im, d]])


@st.composite
def unit_vectors(draw):
    v = np.array([draw(finite) for _ in range(3)])
    n = np.linalg.norm(v)
    if n < 1e-3:
        v, n = np.array([0.0, 0.0, 1.0]), 1.0
    return v / n


def test_pauli_matrices():
    assert np.array_equal(pauli(0), np.eye(2))
    assert np.array_equal(pauli(3), [[1, 0], [0, -1]])
    assert np.array_equal(pauli(2), [[0, -1j], [1j, 0]])
    assert np.array_equal(pauli(1), [[0, 1], [1, 0]])


@pytest.mark.parametrize("bad", [-1, 4, 1.0, True, "x"])
def test_pauli_rejects_bad_index(bad):
    with pytest.raises(ValueError):
        pauli(bad)


def test_pauli_returns_copy():
    m = pauli(1)
    m[0, 0] = 5
    assert pauli(1)[0, 0] == 0


@pytest.mark.parametrize(
    "label, expected",
    [
        ("z+", [1, 0]),
        ("z-", [0, 1]),
        ("x+", [1 / math.sqrt(2), 1 / math.sqrt(2)]),
        ("x-", [1 / math.sqrt(2), -1 / math.sqrt(2)]),
        ("y+", [1 / math.sqrt(2), 1j / math.sqrt(2)]),
        ("y-", [1 / math.sqrt(2), -1j / math.sqrt(2)]),
    ],
)
def test_named_spin_states(label, expected):
    np.testing.assert_allclose(spin_state(label), expected, atol=1e-15)


def test_unicode_minus_label():
    np.testing.assert_allclose(spin_state("z−"), [0, 1])


def test_direction_validation():
    with pytest.raises(ValueError):
        SpinDirection.parse("w+")
    with pytest.raises(ValueError):
        SpinDirection((1.0, 1.0, 0.0))
    with pytest.raises(ValueError):
        SpinDirection.from_vector([0, 0, 0])


@given(unit_vectors(), st.sampled_from([1, -1]))
def test_spin_state_is_normalized_eigenvector(n, sign):
    d = SpinDirection.from_vector(n, sign)
    psi = spin_state(d)
    assert abs(np.linalg.norm(psi) - 1) < 1e-12
    np.testing.assert_allclose(n_dot_sigma(d.axis) @ psi, sign * psi, atol=1e-12)
    lead = psi[0] if abs(psi[0]) > 1e-14 else psi[1]
    assert abs(lead.imag) < 1e-15 and lead.real > 0


@pytest.mark.parametrize(
    "rho, expected",
    [
        (UP, [1, 0, 0, 1]),
        (np.eye(2) / 2, [1, 0, 0, 0]),
        (0.5 * UP, [0.5, 0, 0, 0.5]),
    ],
)
def test_stokes_from_density_examples(rho, expected):
    np.testing.assert_allclose(stokes_from_density(rho), expected, atol=1e-15)


def test_stokes_matches_trace_definition():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = a @ a.conj().T
    expected = [np.trace(pauli(i) @ rho).real for i in range(4)]
    np.testing.assert_allclose(stokes_from_density(rho), expected, atol=1e-12)


def test_stokes_rejects_non_hermitian():
    with pytest.raises(ValueError, match="Hermitian"):
        stokes_from_density(np.array([[1, 1], [0, 0]]))


@pytest.mark.parametrize(
    "s, rho",
    [
        ([1, 0, 0, 1], UP),
        ([1, 1, 0, 0], np.full((2, 2), 0.5)),
        ([1, 0, 0, 0], np.eye(2) / 2),
        ([1, 0, 1, 0], np.array([[0.5, -0.5j], [0.5j, 0.5]])),
    ],
)
def test_density_from_stokes_examples(s, rho):
    np.testing.assert_allclose(density_from_stokes(s), rho, atol=1e-15)


def test_density_from_stokes_accepts_unphysical():
    rho = density_from_stokes([1, 0, 0, 1.2])
    np.testing.assert_allclose(np.linalg.eigvalsh(rho), [-0.1, 1.1])


def test_stack_shapes():
    s = np.arange(24, dtype=float).reshape(2, 3, 4)
    rho = density_from_stokes(s)
    assert rho.shape == (2, 3, 2, 2)
    np.testing.assert_allclose(stokes_from_density(rho), s)


@given(hermitian())
def test_round_trip(rho):
    back = density_from_stokes(stokes_from_density(rho))
    assert np.max(np.abs(back - rho)) <= 1e-14 * max(1.0, np.max(np.abs(rho)))


@pytest.mark.parametrize(
    "rho, d, expected",
    [(UP, "x+", 0.5), (UP, "z+", 1.0), (np.eye(2) / 2, "y+", 0.5)],
)
def test_projector_expectation_examples(rho, d, expected):
    assert projector_expectation(rho, d) == pytest.approx(expected, abs=1e-15)


@given(hermitian())
def test_rotated_basis_identities(rho):
    r = rho
    px = 0.5 * (r[0, 0] + r[0, 1] + r[1, 0] + r[1, 1])
    py = 0.5 * (r[0, 0] + 1j * r[0, 1] - 1j * r[1, 0] + r[1, 1])
    assert abs(projector_expectation(rho, "x+") - px) <= 1e-12 * max(1, np.abs(rho).max())
    assert abs(projector_expectation(rho, "y+") - py) <= 1e-12 * max(1, np.abs(rho).max())


@given(hermitian(), st.sampled_from("xyz"))
def test_completeness(rho, axis):
    total = projector_expectation(rho, axis + "+") + projector_expectation(rho, axis + "-")
    assert total == pytest.approx(np.trace(rho).real, abs=1e-12 * max(1, np.abs(rho).max()))


@settings(max_examples=50)
@given(hermitian(), unit_vectors())
def test_projector_expectation_bounds_for_states(h, n):
    # positive semidefinite, subnormalized
    rho = h @ h.conj().T
    tr = np.trace(rho).real
    if tr == 0:
        return
    rho = 0.7 * rho / tr
    v = projector_expectation(rho, SpinDirection.from_vector(n))
    assert -1e-12 <= v <= 0.7 + 1e-12
