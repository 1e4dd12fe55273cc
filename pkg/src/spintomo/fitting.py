"""Polynomial least-squares models for the Stokes time series.

Features are powers of the normalized time u = t / t_max. The normal
equations are never formed: the design matrix is built in the Legendre
basis on x = 2u - 1 (same span as the monomials, condition number O(1)
instead of ~1e10 at degree 14) and solved by Householder QR. Monomial
coefficients are available for export through ``PolynomialFit.monomial``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Legendre, Polynomial
from numpy.polynomial import legendre as leg
from scipy.linalg import solve_triangular

from .errors import RankDeficientError

MAX_DEGREE = 20


class ExtrapolationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class FeatureMap:
    degree: int
    t_max: float

    def __post_init__(self):
        if not 0 <= self.degree <= MAX_DEGREE:
            raise ValueError(f"degree must be in [0, {MAX_DEGREE}], got {self.degree}")
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")

    def normalize(self, t) -> np.ndarray:
        return np.asarray(t, dtype=float) / self.t_max

    def features(self, t) -> np.ndarray:
        """Rows (1, u, ..., u^d)."""
        return np.vander(self.normalize(t), self.degree + 1, increasing=True)

    def design(self, t) -> np.ndarray:
        """Legendre design matrix used for solving; spans the same space as ``features``."""
        return leg.legvander(2.0 * self.normalize(t) - 1.0, self.degree)


@dataclass(frozen=True)
class PolynomialFit:
    degree: int
    t_max: float
    coef: np.ndarray  # Legendre coefficients in x = 2 t/t_max - 1
    cost: float = 0.0  # sum of squared training residuals

    @classmethod
    def from_monomial(cls, b, t_max: float) -> "PolynomialFit":
        b = np.atleast_1d(np.asarray(b, dtype=float))
        c = Polynomial(b, domain=[0, 1], window=[0, 1]).convert(kind=Legendre, domain=[0, 1]).coef
        c = np.pad(c, (0, len(b) - len(c)))
        return cls(len(b) - 1, float(t_max), c)

    @property
    def monomial(self) -> np.ndarray:
        """Coefficients b_k of sum_k b_k u^k."""
        p = Legendre(self.coef, domain=[0, 1]).convert(kind=Polynomial, domain=[0, 1], window=[0, 1])
        return np.pad(p.coef, (0, self.degree + 1 - len(p.coef)))

    def __call__(self, t) -> np.ndarray:
        u = np.asarray(t, dtype=float) / self.t_max
        return leg.legval(2.0 * u - 1.0, self.coef)


def horner(b, u):
    """Evaluate sum_k b_k u^k."""
    acc = np.zeros_like(np.asarray(u, dtype=float))
    for bk in np.asarray(b, dtype=float)[::-1]:
        acc = acc * u + bk
    return acc


def fit_polynomial(t, y, d: int, t_max: float | None = None) -> PolynomialFit:
    """Least-squares degree-d polynomial minimizing sum_i (y_i - yhat(t_i))^2."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("t and y must be 1-D arrays of equal length")
    if t_max is None:
        t_max = float(np.max(np.abs(t)))
    fmap = FeatureMap(d, t_max)
    n_distinct = len(np.unique(t))
    if n_distinct < d + 1:
        raise RankDeficientError(
            f"degree {d} needs at least {d + 1} distinct sample times, got {n_distinct}"
        )
    q, r = np.linalg.qr(fmap.design(t))
    coef = solve_triangular(r, q.T @ y)
    fit = PolynomialFit(d, float(t_max), coef)
    resid = y - fit(t)
    return PolynomialFit(d, float(t_max), coef, float(resid @ resid))


@dataclass
class RegressionModel:
    """One fitted polynomial per Stokes index."""

    fits: dict[int, PolynomialFit]

    @property
    def t_max(self) -> float:
        return next(iter(self.fits.values())).t_max

    def degrees(self) -> dict[int, int]:
        return {l: f.degree for l, f in self.fits.items()}

    def costs(self) -> dict[int, float]:
        return {l: f.cost for l, f in self.fits.items()}

    @classmethod
    def from_monomial(cls, coeffs: dict, t_max: float) -> "RegressionModel":
        return cls({int(l): PolynomialFit.from_monomial(b, t_max) for l, b in coeffs.items()})


def predict(model: RegressionModel, l: int, t):
    """Predicted S_l(t). Times outside [0, t_max] trigger an ExtrapolationWarning."""
    fit = model.fits[l]
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > fit.t_max * (1 + 1e-12)):
        warnings.warn(f"extrapolating S{l} outside [0, {fit.t_max:.6g}]", ExtrapolationWarning, stacklevel=2)
    out = fit(t_arr)
    return float(out) if out.ndim == 0 else out


@dataclass
class FitReport:
    candidates: list[int]
    train_mse: list[float]
    val_mse: list[float]
    chosen: int
    seed: int
    validation_fraction: float
    fit: PolynomialFit = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "candidates": self.candidates,
            "train_mse": self.train_mse,
            "val_mse": self.val_mse,
            "chosen_degree": self.chosen,
            "split_seed": self.seed,
            "validation_fraction": self.validation_fraction,
            "t_max": self.fit.t_max,
            "training_cost": self.fit.cost,
            "legendre_coefficients": self.fit.coef.tolist(),
            "monomial_coefficients": self.fit.monomial.tolist(),
        }


def holdout_split(n: int, validation_fraction: float, seed: int):
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_val = max(1, int(round(validation_fraction * n)))
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])


def select_degree(t, y, d_range, validation_fraction: float = 0.25, seed: int = 0, t_max: float | None = None) -> FitReport:
    """Pick the degree with the lowest holdout MSE, then refit on all samples.

    Validation errors within a relative 1e-12 of the data's mean square are
    treated as ties (noise-free data bottoms out at rounding level), and ties
    go to the smaller degree.
    """
    candidates = sorted(int(d) for d in d_range)
    if not candidates:
        raise ValueError("degree range is empty")
    if candidates[0] < 0 or candidates[-1] > MAX_DEGREE:
        raise ValueError(f"candidate degrees must lie in [0, {MAX_DEGREE}]")
    if not 0 < validation_fraction < 0.5:
        raise ValueError("validation_fraction must be in (0, 0.5)")
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t_max is None:
        t_max = float(np.max(np.abs(t)))
    train, val = holdout_split(len(t), validation_fraction, seed)
    train_mse, val_mse = [], []
    for d in candidates:
        f = fit_polynomial(t[train], y[train], d, t_max)
        train_mse.append(f.cost / len(train))
        r = y[val] - f(t[val])
        val_mse.append(float(r @ r) / len(val))
    floor = min(val_mse) + 1e-12 * float(np.mean(y * y))
    chosen = next(d for d, m in zip(candidates, val_mse) if m <= floor)
    final = fit_polynomial(t, y, chosen, t_max)
    return FitReport(candidates, train_mse, val_mse, chosen, int(seed), validation_fraction, final)


def fit_decay_rate(t, s0):
    """(amplitude, rate) of A exp(-rate t) fitted to the occupation S0(t).

    Weighted log-linear least squares; weights S0^2 make it first-order
    equivalent to least squares on S0 itself. Non-positive samples are dropped.
    """
    t = np.asarray(t, dtype=float)
    s0 = np.asarray(s0, dtype=float)
    keep = s0 > 0
    t, s0 = t[keep], s0[keep]
    if len(t) < 2:
        raise RankDeficientError("need at least two positive S0 samples to fit a decay rate")
    w = s0  # sqrt of the weights
    a = np.stack([np.ones_like(t), -t], axis=1) * w[:, None]
    sol, *_ = np.linalg.lstsq(a, np.log(s0) * w, rcond=None)
    return float(np.exp(sol[0])), float(sol[1])
