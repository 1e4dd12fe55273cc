"""Linear inversion of per-bin detection probabilities into Stokes parameters."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateRateError, LengthMismatchError


@dataclass
class StokesSamples:
    times: np.ndarray
    values: np.ndarray  # (4, M): S0..S3 per bin
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != (4, len(self.times)):
            raise ValueError(f"expected values of shape (4, {len(self.times)}), got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("Stokes samples contain non-finite values")

    def __getitem__(self, l):
        return self.values[l]


def estimate_stokes(p_zp, p_zm, p_xp, p_yp, delta: float, gamma0: float, times=None) -> StokesSamples:
    """S0..S3 from the four campaigns' probabilities.

    With p0 = (p_z+ + p_z-)/2 and k = 2/(delta*gamma0):
    S0 = k p0, S1 = k (p_x+ - p0), S2 = k (p_y+ - p0), S3 = k (p_z+ - p0).
    """
    named = {"z+": p_zp, "z-": p_zm, "x+": p_xp, "y+": p_yp}
    arrs = {k: np.atleast_1d(np.asarray(v, dtype=float)) for k, v in named.items()}
    n = len(arrs["z+"])
    for k, v in arrs.items():
        if v.ndim != 1 or len(v) != n:
            raise LengthMismatchError(f"probability series for {k} has length {len(v)}, expected {n}", k)
    scale = delta * gamma0
    if not scale > 0:
        raise DegenerateRateError(
            f"Stokes inversion divides by delta*gamma0 = {scale!r}; it must be positive"
        )
    p0 = 0.5 * (arrs["z+"] + arrs["z-"])
    k = 2.0 / scale
    values = np.stack([k * p0, k * (arrs["x+"] - p0), k * (arrs["y+"] - p0), k * (arrs["z+"] - p0)])
    if times is None:
        times = (np.arange(n) + 0.5) * delta
    return StokesSamples(np.asarray(times, dtype=float), values)


def binomial_stokes_sigma(p_bar, R: int, delta: float, gamma0: float) -> np.ndarray:
    """Noise scale (2/(delta*gamma0)) * sqrt(p(1-p)/R) of a Stokes estimate."""
    p_bar = np.asarray(p_bar, dtype=float)
    return (2.0 / (delta * gamma0)) * np.sqrt(p_bar * (1.0 - p_bar) / R)
