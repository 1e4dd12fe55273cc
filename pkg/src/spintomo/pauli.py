"""Pauli algebra, spin states and Stokes <-> density-matrix conversion.

Basis convention: |0> = |up> = |+>, |1> = |down> = |-> along z.
All functions accept stacks of matrices with shape (..., 2, 2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_ATOL = 1e-12

_PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
_PAULI.setflags(write=False)

_AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


def pauli(index: int) -> np.ndarray:
    """Return sigma_index (0 = identity, 1 = x, 2 = y, 3 = z) as a fresh array."""
    if isinstance(index, bool) or not isinstance(index, (int, np.integer)) or not 0 <= index <= 3:
        raise ValueError(f"Pauli index must be 0, 1, 2 or 3; got {index!r}")
    return _PAULI[index].copy()


@dataclass(frozen=True)
class SpinDirection:
    """A spin-quantization direction: unit axis plus polarity.

    Named directions ("z+", "x-", ...) carry their label; arbitrary axes
    are built with :meth:`from_vector`.
    """

    axis: tuple[float, float, float]
    sign: int = 1
    label: str | None = None

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        norm = float(np.linalg.norm(self.axis))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"direction axis must be a unit vector, |n| = {norm!r}")

    @classmethod
    def parse(cls, label: str) -> "SpinDirection":
        label = label.strip().replace("−", "-")
        if len(label) != 2 or label[0] not in _AXES or label[1] not in "+-":
            raise ValueError(f"unknown spin direction {label!r}; expected e.g. 'z+', 'x-'")
        return cls(_AXES[label[0]], 1 if label[1] == "+" else -1, label)

    @classmethod
    def from_vector(cls, n, sign: int = 1) -> "SpinDirection":
        n = np.asarray(n, dtype=float)
        if n.shape != (3,):
            raise ValueError("direction vector must have three components")
        norm = np.linalg.norm(n)
        if norm == 0:
            raise ValueError("direction vector must be nonzero")
        return cls(tuple(float(v) for v in n / norm), sign)

    @property
    def bloch(self) -> np.ndarray:
        """Bloch vector of the projector |d><d|."""
        return self.sign * np.asarray(self.axis)

    def __str__(self):
        return self.label if self.label else f"{'+' if self.sign > 0 else '-'}{self.axis}"


def as_direction(d) -> SpinDirection:
    if isinstance(d, SpinDirection):
        return d
    if isinstance(d, str):
        return SpinDirection.parse(d)
    return SpinDirection.from_vector(d)


def n_dot_sigma(n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    return n[0] * _PAULI[1] + n[1] * _PAULI[2] + n[2] * _PAULI[3]


def spin_state(d) -> np.ndarray:
    """Normalized eigenvector of n.sigma with eigenvalue equal to the polarity.

    The global phase makes the first nonzero amplitude real and positive.
    """
    d = as_direction(d)
    proj = 0.5 * (_PAULI[0] + d.sign * n_dot_sigma(d.axis))
    # the projector's columns span the eigenspace; pick the better-conditioned one
    col = proj[:, int(np.argmax(np.linalg.norm(proj, axis=0)))]
    col = col / np.linalg.norm(col)
    lead = col[0] if abs(col[0]) > 1e-14 else col[1]
    return col * (abs(lead) / lead)


def check_hermitian(rho, atol: float = HERMITIAN_ATOL) -> None:
    rho = np.asarray(rho)
    dev = np.max(np.abs(rho - np.conj(np.swapaxes(rho, -1, -2))), initial=0.0)
    if dev > atol:
        raise ValueError(f"matrix is not Hermitian (max |m - m^dag| = {dev:.3g})")


def stokes_from_density(rho) -> np.ndarray:
    """Stokes parameters s_i = Tr(sigma_i rho); output shape (..., 4)."""
    rho = np.asarray(rho, dtype=complex)
    check_hermitian(rho)
    r00 = rho[..., 0, 0].real
    r11 = rho[..., 1, 1].real
    r01 = rho[..., 0, 1]
    return np.stack([r00 + r11, 2.0 * r01.real, -2.0 * r01.imag, r00 - r11], axis=-1)


def density_from_stokes(s) -> np.ndarray:
    """rho = (1/2) sum_i s_i sigma_i. Unphysical Stokes vectors are accepted."""
    s = np.asarray(s, dtype=float)
    if s.shape[-1] != 4:
        raise ValueError(f"Stokes vectors need 4 components, got shape {s.shape}")
    s0, s1, s2, s3 = (s[..., k] for k in range(4))
    rho = np.empty(s.shape[:-1] + (2, 2), dtype=complex)
    rho[..., 0, 0] = 0.5 * (s0 + s3)
    rho[..., 1, 1] = 0.5 * (s0 - s3)
    rho[..., 0, 1] = 0.5 * (s1 - 1j * s2)
    rho[..., 1, 0] = 0.5 * (s1 + 1j * s2)
    return rho


def projector_expectation(rho, d) -> np.ndarray | float:
    """<d| rho |d> for a (stack of) Hermitian qubit matrices."""
    rho = np.asarray(rho, dtype=complex)
    check_hermitian(rho)
    psi = spin_state(d)
    val = np.einsum("i,...ij,j->...", psi.conj(), rho, psi).real
    return float(val) if np.ndim(val) == 0 else val
