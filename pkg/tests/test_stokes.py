import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import open_stokes_x_field
from spintomo.dynamics import DotHamiltonian, LeadSetup, TimeGrid, embed, integrate, tunneling_probability_trace
from spintomo.errors import DegenerateRateError, LengthMismatchError
from spintomo.events import build_partition, draw_events, empirical_probabilities
from spintomo.pauli import stokes_from_density
from spintomo.stokes import StokesSamples, binomial_stokes_sigma, estimate_stokes

DIRS = ("z+", "z-", "x+", "y+")
GRID = TimeGrid(4 * math.pi, 100)
DG = GRID.delta * 0.1


@pytest.fixture(scope="module")
def physics():
    lead = LeadSetup(0.1)
    traj = integrate(embed(np.array([1, 0])), DotHamiltonian(), lead, GRID)
    traces = {d: tunneling_probability_trace(traj, d, lead, GRID).values for d in DIRS}
    return traj, traces


def test_initial_state_example():
    s = estimate_stokes([DG], [0.0], [DG / 2], [DG / 2], GRID.delta, 0.1)
    np.testing.assert_allclose(s.values[:, 0], [1, 0, 0, 1], atol=1e-15)


def test_isotropic_example():
    c = 0.003
    s = estimate_stokes([c], [c], [c], [c], 0.5, 0.2)
    np.testing.assert_allclose(s.values[:, 0], [2 * c / 0.1, 0, 0, 0], atol=1e-15)


def test_half_period_example():
    # exact bin probabilities of the open system at Omega t = pi
    e = math.exp(-0.1 * math.pi)
    p = {"z+": DG * 0.0, "z-": DG * e, "x+": DG * e / 2, "y+": DG * e / 2}
    s = estimate_stokes(p["z+"], p["z-"], p["x+"], p["y+"], GRID.delta, 0.1)
    np.testing.assert_allclose(s.values[:, 0], [e, 0, 0, -e], atol=1e-15)
    assert e == pytest.approx(0.73040, abs=1e-5)


def test_consistency_with_density(physics):
    traj, p = physics
    s = estimate_stokes(p["z+"], p["z-"], p["x+"], p["y+"], GRID.delta, 0.1, GRID.centers)
    np.testing.assert_allclose(s.values.T, stokes_from_density(traj.qubit_block), atol=1e-12)
    np.testing.assert_allclose(s.values, open_stokes_x_field(GRID.centers, 0.1), atol=1e-9)


@given(st.floats(0.01, 100), st.integers(0, 2**32 - 1))
def test_linearity(c, seed):
    rng = np.random.default_rng(seed)
    p = rng.uniform(0, 0.01, size=(4, 10))
    a = estimate_stokes(*p, 0.1, 0.1).values
    b = estimate_stokes(*(c * p), 0.1, 0.1).values
    np.testing.assert_allclose(b, c * a, rtol=1e-12, atol=1e-15)


def test_length_mismatch_names_direction():
    with pytest.raises(LengthMismatchError, match="x\\+") as exc:
        estimate_stokes(np.zeros(5), np.zeros(5), np.zeros(4), np.zeros(5), 0.1, 0.1)
    assert exc.value.name == "x+"


def test_zero_divisor():
    with pytest.raises(DegenerateRateError, match="delta\\*gamma0"):
        estimate_stokes([0.0], [0.0], [0.0], [0.0], 0.1, 0.0)


def test_samples_validation():
    with pytest.raises(ValueError):
        StokesSamples(np.arange(3.0), np.zeros((4, 2)))
    with pytest.raises(ValueError):
        StokesSamples(np.arange(2.0), np.array([[np.nan, 0]] * 4))


def test_noise_scale(physics):
    _, p = physics
    R = 10**5
    est = {}
    for d in DIRS:
        part = build_partition(p[d], 10**7)
        est[d] = empirical_probabilities(draw_events(part, R, seed=31, direction=d))
    s = estimate_stokes(est["z+"], est["z-"], est["x+"], est["y+"], GRID.delta, 0.1).values
    truth = open_stokes_x_field(GRID.centers, 0.1)
    p_bar = 0.5 * (p["z+"] + p["z-"])
    predicted = np.mean(binomial_stokes_sigma(p_bar, R, GRID.delta, 0.1))
    for l in range(4):
        spread = np.std(s[l] - truth[l])
        assert predicted / 2 <= spread <= 2 * predicted, (l, spread, predicted)
