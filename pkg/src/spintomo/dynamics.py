"""Lindblad dynamics of a singly occupied quantum dot drained into polarized leads.

The state lives on the three-level space {|up>, |down>, |vac>} (indices 0, 1, 2).
Time is measured in units of 1/omega with hbar = 1.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DiscretizationError, StepSizeError
from .pauli import SpinDirection, as_direction, check_hermitian, n_dot_sigma, spin_state

UP, DOWN, VAC = 0, 1, 2
MAX_PHASE_PER_STEP = 0.01


@dataclass(frozen=True)
class DotHamiltonian:
    omega: float = 1.0
    n_hat: tuple[float, float, float] = (1.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        norm = float(np.linalg.norm(self.n_hat))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"n_hat must be a unit vector, |n_hat| = {norm!r}")

    def qubit_matrix(self) -> np.ndarray:
        return 0.5 * self.omega * n_dot_sigma(self.n_hat)

    def matrix(self) -> np.ndarray:
        """H0 embedded in the three-level space; zero on the empty dot."""
        h = np.zeros((3, 3), dtype=complex)
        h[:2, :2] = self.qubit_matrix()
        return h


@dataclass(frozen=True)
class LeadSetup:
    """Pair of fully polarized drains along ``measured_axis`` (both polarities)."""

    gamma0: float
    measured_axis: str = "z"

    def __post_init__(self):
        if not self.gamma0 >= 0:
            raise ValueError(f"gamma0 must be non-negative, got {self.gamma0}")
        if self.measured_axis not in ("x", "y", "z"):
            raise ValueError(f"measured_axis must be x, y or z, got {self.measured_axis!r}")

    def jump_operators(self) -> list[np.ndarray]:
        ops = []
        for pol in "+-":
            psi = spin_state(self.measured_axis + pol)
            op = np.zeros((3, 3), dtype=complex)
            op[VAC, :2] = math.sqrt(self.gamma0) * psi.conj()
            ops.append(op)
        return ops


@dataclass(frozen=True)
class TimeGrid:
    T: float
    M: int

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"observation time T must be positive, got {self.T}")
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"bin count M must be a positive integer, got {self.M}")

    @property
    def delta(self) -> float:
        return self.T / self.M

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(1, self.M + 1) - 0.5) * self.delta

    def dense(self, factor: int = 10) -> np.ndarray:
        return np.linspace(0.0, self.T, factor * self.M)


@dataclass
class StateTrajectory:
    times: np.ndarray
    states: np.ndarray  # (n, 3, 3)

    @property
    def qubit_block(self) -> np.ndarray:
        return self.states[:, :2, :2]

    def to_csv(self, path) -> None:
        """Columns: t, then re/im of rho[j][k] in row-major order (0=up, 1=down, 2=vac)."""
        header = ["t"]
        for j in range(3):
            for k in range(3):
                header += [f"re_{j}{k}", f"im_{j}{k}"]
        flat = self.states.reshape(len(self.times), 9)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for t, row in zip(self.times, flat):
                vals = [t]
                for z in row:
                    vals += [z.real, z.imag]
                w.writerow([format(float(v), ".17g") for v in vals])


@dataclass
class ProbabilityTrace:
    direction: SpinDirection
    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.values)


def embed(rho_qubit) -> np.ndarray:
    """Place a qubit state (matrix or amplitude pair) in the three-level space."""
    rho_qubit = np.asarray(rho_qubit, dtype=complex)
    if rho_qubit.shape == (2,):
        rho_qubit = np.outer(rho_qubit, rho_qubit.conj())
    rho3 = np.zeros((3, 3), dtype=complex)
    rho3[:2, :2] = rho_qubit
    rho3[VAC, VAC] = 1.0 - np.trace(rho_qubit).real
    return rho3


def closed_propagator(h: DotHamiltonian, t: float) -> np.ndarray:
    half = 0.5 * h.omega * t
    return math.cos(half) * np.eye(2) - 1j * math.sin(half) * n_dot_sigma(h.n_hat)


def evolve_closed(h: DotHamiltonian, rho0, t: float) -> np.ndarray:
    u = closed_propagator(h, t)
    return u @ np.asarray(rho0, dtype=complex) @ u.conj().T


def analytic_open_block(h: DotHamiltonian, gamma0: float, rho0, t: float) -> np.ndarray:
    """Qubit block of the open-system solution, exp(-gamma0 t) U rho0 U^dag.

    Exact because the two drains sum to gamma0 * identity on the qubit block.
    """
    return math.exp(-gamma0 * t) * evolve_closed(h, rho0, t)


def lindblad_rhs(rho3, h: DotHamiltonian, lead: LeadSetup) -> np.ndarray:
    rho3 = np.asarray(rho3, dtype=complex)
    check_hermitian(rho3)
    hm = h.matrix()
    out = -1j * (hm @ rho3 - rho3 @ hm)
    for op in lead.jump_operators():
        opd = op.conj().T
        ldl = opd @ op
        out += op @ rho3 @ opd - 0.5 * (ldl @ rho3 + rho3 @ ldl)
    return out


def _liouvillian(h: DotHamiltonian, lead: LeadSetup):
    # rhs(rho) = A rho + rho A^dag + sum J rho J^dag, with A = -iH - (1/2) sum J^dag J
    hm = h.matrix()
    jumps = lead.jump_operators()
    a = -1j * hm - 0.5 * sum(j.conj().T @ j for j in jumps)
    return a, jumps


def _check_step(step: float, h: DotHamiltonian, lead: LeadSetup) -> None:
    if not step > 0:
        raise StepSizeError(f"integration step must be positive, got {step}")
    if step * h.omega > MAX_PHASE_PER_STEP * (1 + 1e-12):
        raise StepSizeError(f"step*omega = {step * h.omega:.4g} exceeds {MAX_PHASE_PER_STEP}")
    if step * lead.gamma0 > MAX_PHASE_PER_STEP * (1 + 1e-12):
        raise StepSizeError(f"step*gamma0 = {step * lead.gamma0:.4g} exceeds {MAX_PHASE_PER_STEP}")


def propagate(rho3_0, times, h: DotHamiltonian, lead: LeadSetup, step: float) -> StateTrajectory:
    """Fixed-step RK4 from t = 0 through the increasing ``times``.

    Each interval between consecutive output times is split into equal substeps
    no longer than ``step``.
    """
    _check_step(step, h, lead)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or (times.size and times[0] < 0) or np.any(np.diff(times) < 0):
        raise ValueError("output times must be non-negative and non-decreasing")
    rho = np.array(rho3_0, dtype=complex)
    check_hermitian(rho)
    a, jumps = _liouvillian(h, lead)
    ad = a.conj().T

    def f(r):
        out = a @ r + r @ ad
        for j in jumps:
            out += j @ r @ j.conj().T
        return out

    states = np.empty((len(times), 3, 3), dtype=complex)
    t_now = 0.0
    for idx, t_out in enumerate(times):
        span = t_out - t_now
        n_sub = math.ceil(span / step * (1 - 1e-12)) if span > 0 else 0
        if n_sub:
            dt = span / n_sub
            for _ in range(n_sub):
                k1 = f(rho)
                k2 = f(rho + 0.5 * dt * k1)
                k3 = f(rho + 0.5 * dt * k2)
                k4 = f(rho + dt * k3)
                rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            rho = 0.5 * (rho + rho.conj().T)
        states[idx] = rho
        t_now = t_out
    return StateTrajectory(times.copy(), states)


def default_step(grid: TimeGrid, h: DotHamiltonian, lead: LeadSetup, min_substeps: int = 10) -> float:
    """delta/k with the smallest k >= min_substeps keeping rate*step <= 0.01."""
    fastest = max(h.omega, lead.gamma0)
    k = max(min_substeps, math.ceil(grid.delta * fastest / MAX_PHASE_PER_STEP))
    return grid.delta / k


def integrate(rho3_0, h: DotHamiltonian, lead: LeadSetup, grid: TimeGrid, step: float | None = None) -> StateTrajectory:
    """Trajectory sampled at the bin centers of ``grid``."""
    if step is None:
        step = default_step(grid, h, lead)
    if step > grid.delta * (1 + 1e-12):
        raise StepSizeError(f"step {step:.4g} exceeds the bin width {grid.delta:.4g}")
    return propagate(rho3_0, grid.centers, h, lead, step)


def tunneling_probability_trace(traj: StateTrajectory, d, lead: LeadSetup, grid: TimeGrid) -> ProbabilityTrace:
    """Midpoint-rule bin probabilities p_i = delta * gamma0 * <d|rho(t_i)|d>."""
    d = as_direction(d)
    if len(traj.times) != grid.M or not np.allclose(traj.times, grid.centers, rtol=0, atol=1e-12 * grid.T):
        raise ValueError("trajectory is not sampled on the bin centers of the grid")
    psi = spin_state(d)
    overlap = np.einsum("i,nij,j->n", psi.conj(), traj.qubit_block, psi).real
    p = grid.delta * lead.gamma0 * np.clip(overlap, 0.0, None)
    return _checked_trace(d, grid, p, "midpoint")


def exact_bin_probabilities(h: DotHamiltonian, lead: LeadSetup, rho0, d, grid: TimeGrid) -> ProbabilityTrace:
    """Bin probabilities from the exact integral of gamma0 <d|rho(t)|d> over each bin.

    Uses the closed-form qubit-block solution: the Bloch vector precesses about
    n_hat while the whole block decays as exp(-gamma0 t).
    """
    d = as_direction(d)
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape == (2,):
        rho0 = np.outer(rho0, rho0.conj())
    g, w = lead.gamma0, h.omega
    if g == 0:
        return _checked_trace(d, grid, np.zeros(grid.M), "exact")
    s0 = np.trace(rho0).real
    r0 = np.array([2 * rho0[0, 1].real, -2 * rho0[0, 1].imag, (rho0[0, 0] - rho0[1, 1]).real])
    n = np.asarray(h.n_hat)
    m = d.bloch
    a = n.dot(r0) * n
    c_amp = 0.5 * (s0 + a.dot(m))
    c_cos = 0.5 * (r0 - a).dot(m)
    c_sin = 0.5 * np.cross(n, r0).dot(m)

    def antideriv(t):
        e = np.exp(-g * t)
        den = g * g + w * w
        return (
            -c_amp * e / g
            + c_cos * e * (w * np.sin(w * t) - g * np.cos(w * t)) / den
            + c_sin * e * (-g * np.sin(w * t) - w * np.cos(w * t)) / den
        )

    edges = np.arange(grid.M + 1) * grid.delta
    f = antideriv(edges)
    p = g * np.diff(f)
    return _checked_trace(d, grid, np.clip(p, 0.0, None), "exact")


def _checked_trace(d, grid, p, mode) -> ProbabilityTrace:
    if np.any(p > 1.0):
        i = int(np.argmax(p))
        raise DiscretizationError(
            f"bin {i + 1} probability {p[i]:.4g} exceeds 1; reduce delta*gamma0"
        )
    return ProbabilityTrace(d, grid.centers, p, {"mode": mode})
