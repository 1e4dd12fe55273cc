"""Experiment configuration: JSON loading, validation and serialization."""

from __future__ import annotations

import dataclasses
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .pauli import SpinDirection, spin_state

NAMED_STATES = ("z+", "z-", "x+", "y+", "x-", "y-")


@dataclass(frozen=True)
class ExperimentConfig:
    gamma0_over_omega: float = 0.1
    n_hat: tuple = (1.0, 0.0, 0.0)
    initial_state: object = "z+"
    T_omega: float = 4 * math.pi
    M: int = 100
    L: int = 10**7
    R: int = 10**5
    seed: int = 42
    degree_range: tuple = (2, 16)
    validation_fraction: float = 0.25
    exact_integral: bool = False
    project_psd: bool = False
    out_dir: str | None = None

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in dataclasses.fields(cls)]

    @classmethod
    def from_dict(cls, data: dict, *, text: str | None = None, source: str = "<config>") -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError(f"{source}: top-level value must be a JSON object")
        known = set(cls.field_names())
        for key in data:
            if key not in known:
                raise ConfigError(f"{_where(source, text, key)}: unknown field {key!r}")
        values = {}
        for key, raw in data.items():
            try:
                values[key] = _COERCE[key](raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{_where(source, text, key)}: field {key!r}: {exc}") from None
        cfg = cls(**values)
        try:
            cfg.validate()
        except ConfigError as exc:
            key = getattr(exc, "field", None)
            raise ConfigError(f"{_where(source, text, key)}: {exc}") from None
        return cfg

    def validate(self) -> None:
        def bad(field, msg):
            err = ConfigError(f"field {field!r}: {msg}")
            err.field = field
            raise err

        if not (math.isfinite(self.gamma0_over_omega) and self.gamma0_over_omega >= 0):
            bad("gamma0_over_omega", "must be a finite non-negative number")
        if not (math.isfinite(self.T_omega) and self.T_omega > 0):
            bad("T_omega", "must be positive")
        if self.M < 10:
            bad("M", "must be at least 10")
        if self.R < 1:
            bad("R", "must be positive")
        if self.L < 10**4 * self.M:
            bad("L", f"must be at least 1e4 * M = {10**4 * self.M}")
        if not 0 <= self.seed < 2**64:
            bad("seed", "must be an unsigned 64-bit integer")
        lo, hi = self.degree_range
        if not 0 <= lo <= hi <= 20:
            bad("degree_range", "must satisfy 0 <= d_min <= d_max <= 20")
        if not 0 < self.validation_fraction < 0.5:
            bad("validation_fraction", "must be in (0, 0.5)")
        n_train = self.M - max(1, int(round(self.validation_fraction * self.M)))
        if hi + 1 > n_train:
            bad("degree_range", f"d_max = {hi} needs more than the {n_train} training bins available")

    def to_dict(self, include_out_dir: bool = True) -> dict:
        d = {
            "gamma0_over_omega": self.gamma0_over_omega,
            "n_hat": list(self.n_hat),
            "initial_state": self.initial_state if isinstance(self.initial_state, str)
            else [list(a) for a in self.initial_state],
            "T_omega": self.T_omega,
            "M": self.M,
            "L": self.L,
            "R": self.R,
            "seed": self.seed,
            "degree_range": list(self.degree_range),
            "validation_fraction": self.validation_fraction,
            "exact_integral": self.exact_integral,
            "project_psd": self.project_psd,
        }
        if include_out_dir:
            d["out_dir"] = self.out_dir
        return d

    def replace(self, **changes) -> "ExperimentConfig":
        data = self.to_dict()
        data.update(changes)
        return ExperimentConfig.from_dict(data, source="<override>")

    @property
    def unit_n_hat(self) -> tuple[float, float, float]:
        n = np.asarray(self.n_hat, dtype=float)
        return tuple(float(v) for v in n / np.linalg.norm(n))

    def initial_amplitudes(self) -> np.ndarray:
        if isinstance(self.initial_state, str):
            return spin_state(SpinDirection.parse(self.initial_state))
        amps = np.array([complex(re_, im_) for re_, im_ in self.initial_state])
        return amps / np.linalg.norm(amps)


def _where(source, text, key):
    if text is None or key is None:
        return source
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    if not m:
        return source
    return f"{source}:{text.count(chr(10), 0, m.start()) + 1}"


def _float(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise TypeError(f"expected a number, got {v!r}")
    return float(v)


def _int(v):
    if isinstance(v, bool) or not isinstance(v, int):
        if isinstance(v, float) and v.is_integer():
            return int(v)
        raise TypeError(f"expected an integer, got {v!r}")
    return v


def _bool(v):
    if not isinstance(v, bool):
        raise TypeError(f"expected true or false, got {v!r}")
    return v


def _vector(v):
    if not isinstance(v, (list, tuple)) or len(v) != 3:
        raise ValueError("expected a list of three numbers")
    vec = tuple(_float(x) for x in v)
    if np.linalg.norm(vec) == 0:
        raise ValueError("direction vector must be nonzero")
    return vec


def _state(v):
    if isinstance(v, str):
        label = v.strip().replace("−", "-")
        if label not in NAMED_STATES:
            raise ValueError(f"expected one of {', '.join(NAMED_STATES)} or an amplitude pair, got {v!r}")
        return label
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise ValueError("amplitude pair must have two entries")
    amps = []
    for a in v:
        if isinstance(a, (list, tuple)):
            if len(a) != 2:
                raise ValueError("complex amplitudes are written as [re, im]")
            amps.append((_float(a[0]), _float(a[1])))
        else:
            amps.append((_float(a), 0.0))
    if sum(x * x + y * y for x, y in amps) == 0:
        raise ValueError("amplitude pair must be nonzero")
    return tuple(amps)


def _degrees(v):
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise ValueError("expected [d_min, d_max]")
    return (_int(v[0]), _int(v[1]))


def _fraction(v):
    return _float(v)


def _path(v):
    if v is None:
        return None
    if not isinstance(v, str):
        raise TypeError("expected a path string")
    return v


_COERCE = {
    "gamma0_over_omega": _float,
    "n_hat": _vector,
    "initial_state": _state,
    "T_omega": _float,
    "M": _int,
    "L": _int,
    "R": _int,
    "seed": _int,
    "degree_range": _degrees,
    "validation_fraction": _fraction,
    "exact_integral": _bool,
    "project_psd": _bool,
    "out_dir": _path,
}


def coerce_field(name: str, value):
    return _COERCE[name](value)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    return ExperimentConfig.from_dict(data, text=text, source=str(path))
