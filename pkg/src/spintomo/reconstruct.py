"""Density-matrix reconstruction from fitted Stokes curves and quality metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatchError
from .fitting import RegressionModel
from .pauli import check_hermitian, density_from_stokes

MIN_TRACE_FOR_FIDELITY = 0.05


def reconstruct_density(model: RegressionModel, t) -> np.ndarray:
    """rho_hat(t) = (1/2) sum_l S_l_hat(t) sigma_l; shape (2, 2) or (n, 2, 2)."""
    t_arr = np.asarray(t, dtype=float)
    s = np.stack([model.fits[l](t_arr) for l in range(4)], axis=-1)
    return density_from_stokes(s)


def frobenius_distance(a, b) -> np.ndarray:
    return np.sqrt(np.sum(np.abs(np.asarray(a) - np.asarray(b)) ** 2, axis=(-2, -1)))


def _psd_part(rho):
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    return w / w.sum(), v


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    Both arguments are reduced to their positive part and rescaled to unit
    trace first; linear-inversion estimates can have a small negative
    eigenvalue, which would otherwise push the value above one.
    """
    wr, vr = _psd_part(rho)
    ws, vs = _psd_part(sigma)
    sr = (vr * np.sqrt(wr)) @ vr.conj().T
    sig = (vs * ws) @ vs.conj().T
    inner = sr @ sig @ sr
    w = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    return float(min(np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2, 1.0 + 1e-12))


@dataclass
class Physicality:
    eigenvalues: np.ndarray
    is_psd: bool
    empty: bool
    projected: bool


def physicality_check(rho, project: bool = False, atol: float = 1e-12):
    """Eigenvalue diagnostics; optionally clip negative eigenvalues and rescale to the original trace."""
    rho = np.asarray(rho, dtype=complex)
    check_hermitian(rho)
    w, v = np.linalg.eigh(rho)
    w = w[::-1]
    v = v[:, ::-1]
    tr = float(np.trace(rho).real)
    empty = tr <= atol
    is_psd = bool(w[-1] >= -atol)
    if not project or is_psd or empty:
        return rho, Physicality(w, is_psd, empty, False)
    clipped = np.clip(w, 0.0, None)
    clipped *= tr / clipped.sum()
    out = (v * clipped) @ v.conj().T
    return 0.5 * (out + out.conj().T), Physicality(w, is_psd, empty, True)


@dataclass
class ReconstructionReport:
    times: np.ndarray
    rho_hat: np.ndarray
    rho_ref: np.ndarray
    rho_closed: np.ndarray | None
    frobenius: np.ndarray
    fidelity: np.ndarray  # NaN where either trace < MIN_TRACE_FOR_FIDELITY
    min_eigenvalue: np.ndarray
    closed_consistency: float | None = None  # max |rho_closed - exp(gamma0 t) rho_ref|

    def summary(self) -> dict:
        fid = self.fidelity[np.isfinite(self.fidelity)]
        out = {
            "n_times": int(len(self.times)),
            "mean_frobenius": float(np.mean(self.frobenius)),
            "max_frobenius": float(np.max(self.frobenius)),
            "mean_fidelity": float(np.mean(fid)) if fid.size else None,
            "min_fidelity": float(np.min(fid)) if fid.size else None,
            "n_fidelity_defined": int(fid.size),
            "min_eigenvalue": float(np.min(self.min_eigenvalue)),
            "n_non_psd": int(np.sum(self.min_eigenvalue < -1e-12)),
            "mean_abs_re_rho01": float(np.mean(np.abs(self.rho_hat[:, 0, 1].real))),
            "mean_abs_re_rho01_error": float(np.mean(np.abs(self.rho_hat[:, 0, 1].real - self.rho_ref[:, 0, 1].real))),
            "mean_abs_im_rho01_error": float(np.mean(np.abs(self.rho_hat[:, 0, 1].imag - self.rho_ref[:, 0, 1].imag))),
        }
        if self.closed_consistency is not None:
            out["max_closed_vs_scaled_open"] = self.closed_consistency
        return out


def compare(times, rho_hat, rho_ref, rho_closed=None, times_ref=None, gamma0=None) -> ReconstructionReport:
    """Per-time distances between a reconstruction and a reference on the same grid."""
    times = np.asarray(times, dtype=float)
    rho_hat = np.asarray(rho_hat, dtype=complex)
    rho_ref = np.asarray(rho_ref, dtype=complex)
    if times_ref is not None and (len(times_ref) != len(times) or np.any(np.asarray(times_ref) != times)):
        raise LengthMismatchError("reconstruction and reference are on different time grids")
    if rho_hat.shape != (len(times), 2, 2) or rho_ref.shape != rho_hat.shape:
        raise LengthMismatchError(
            f"series shapes {rho_hat.shape} and {rho_ref.shape} do not match {len(times)} times"
        )
    frob = frobenius_distance(rho_hat, rho_ref)
    fid = np.full(len(times), np.nan)
    tr_hat = np.trace(rho_hat, axis1=1, axis2=2).real
    tr_ref = np.trace(rho_ref, axis1=1, axis2=2).real
    for i in np.flatnonzero((tr_hat > MIN_TRACE_FOR_FIDELITY) & (tr_ref > MIN_TRACE_FOR_FIDELITY)):
        fid[i] = fidelity(rho_hat[i] / tr_hat[i], rho_ref[i] / tr_ref[i])
    min_eig = np.linalg.eigvalsh(rho_hat)[:, 0]
    closed = None if rho_closed is None else np.asarray(rho_closed, dtype=complex)
    consistency = None
    if closed is not None and gamma0 is not None:
        scaled = np.exp(gamma0 * times)[:, None, None] * rho_ref
        consistency = float(np.max(np.abs(closed - scaled)))
    return ReconstructionReport(times, rho_hat, rho_ref, closed, frob, fid, min_eig, consistency)
