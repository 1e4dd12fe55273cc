"""End-to-end tomography run, split into restartable stages.

Each stage reads its inputs from the output directory and writes its
artifacts there, so ``run_all`` is exactly the chain
simulate -> sample -> estimate -> fit -> reconstruct.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .dynamics import (
    DotHamiltonian,
    LeadSetup,
    TimeGrid,
    default_step,
    embed,
    evolve_closed,
    exact_bin_probabilities,
    integrate,
    propagate,
    tunneling_probability_trace,
)
from .errors import ArtifactError, LengthMismatchError
from .events import CAMPAIGN_DIRECTIONS, DIRECTION_IDS, SHARD_SIZE, build_partition, draw_events, empirical_probabilities
from .fitting import PolynomialFit, RegressionModel, select_degree
from .reconstruct import compare, physicality_check, reconstruct_density
from .stokes import estimate_stokes

log = logging.getLogger(__name__)

TRAJECTORY = "trajectory.csv"
PROBABILITIES = "probabilities.csv"
STOKES_SAMPLES = "stokes_samples.csv"
STOKES_FIT = "stokes_fit.csv"
FIT_REPORT = "fit_report.json"
RHO = "rho_reconstructed.csv"
METRICS = "metrics.json"
MANIFEST = "manifest.json"
DENSE_FACTOR = 10


def counts_file(direction: str) -> str:
    return f"counts_{direction}.csv"


ARTIFACTS = [TRAJECTORY, PROBABILITIES, *(counts_file(d) for d in CAMPAIGN_DIRECTIONS),
             STOKES_SAMPLES, STOKES_FIT, FIT_REPORT, RHO, METRICS]


@dataclass(frozen=True)
class Physics:
    h: DotHamiltonian
    lead: LeadSetup
    grid: TimeGrid
    psi0: np.ndarray

    @property
    def rho0(self) -> np.ndarray:
        return np.outer(self.psi0, self.psi0.conj())

    @classmethod
    def from_config(cls, cfg: ExperimentConfig) -> "Physics":
        # omega is the unit of inverse time
        return cls(
            DotHamiltonian(1.0, cfg.unit_n_hat),
            LeadSetup(cfg.gamma0_over_omega),
            TimeGrid(cfg.T_omega, cfg.M),
            cfg.initial_amplitudes(),
        )


def fit_split_seed(seed: int, l: int) -> int:
    ss = np.random.SeedSequence([int(seed), 1000 + l])
    return int(ss.generate_state(1, np.uint64)[0])


# --- file helpers -------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(path: Path, header: list[str], columns: list) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([_fmt(v) for v in row])


def read_csv(path: Path) -> dict[str, np.ndarray]:
    if not path.exists():
        raise ArtifactError(f"missing upstream artifact {path.name} in {path.parent}")
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ArtifactError(f"cannot read {path}: {exc.strerror}") from None
    if not rows:
        raise ArtifactError(f"{path.name} is empty")
    header, body = rows[0], rows[1:]
    try:
        data = np.array(body, dtype=float).reshape(len(body), len(header))
    except ValueError:
        raise ArtifactError(f"{path.name} is malformed") from None
    return {name: data[:, k] for k, name in enumerate(header)}


def write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path: Path):
    if not path.exists():
        raise ArtifactError(f"missing upstream artifact {path.name} in {path.parent}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ArtifactError(f"cannot read {path.name}: {exc}") from None


def _prepare(out: Path) -> Path:
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ArtifactError(f"cannot create output directory {out}: {exc.strerror}") from None
    return out


# --- stages -------------------------------------------------------------------

def simulate(cfg: ExperimentConfig, out) -> None:
    """Integrate the master equation and write per-bin detection probabilities."""
    out = _prepare(out)
    ph = Physics.from_config(cfg)
    traj = integrate(embed(ph.psi0), ph.h, ph.lead, ph.grid)
    traj.to_csv(out / TRAJECTORY)
    cols = [np.arange(1, ph.grid.M + 1), ph.grid.centers]
    for d in CAMPAIGN_DIRECTIONS:
        if cfg.exact_integral:
            tr = exact_bin_probabilities(ph.h, ph.lead, ph.rho0, d, ph.grid)
        else:
            tr = tunneling_probability_trace(traj, d, ph.lead, ph.grid)
        cols.append(tr.values)
    write_csv(out / PROBABILITIES, ["bin_index", "t_center"] + [f"p_{d}" for d in CAMPAIGN_DIRECTIONS], cols)
    write_manifest(cfg, out)


def sample(cfg: ExperimentConfig, out, directions=None, workers: int = 1) -> None:
    """Run the counting campaigns, one independent stream per direction."""
    out = _prepare(out)
    directions = list(directions or CAMPAIGN_DIRECTIONS)
    for d in directions:
        if d not in CAMPAIGN_DIRECTIONS:
            raise ValueError(f"unknown campaign direction {d!r}")
    probs = read_csv(out / PROBABILITIES)

    def campaign(d):
        part = build_partition(probs[f"p_{d}"], cfg.L)
        return draw_events(part, cfg.R, cfg.seed, d, workers=workers)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=min(workers, len(directions))) as pool:
            records = list(pool.map(campaign, directions))
    else:
        records = [campaign(d) for d in directions]
    for rec in records:
        write_csv(out / counts_file(rec.direction), ["bin_index", "t_center", "count"],
                  [probs["bin_index"].astype(int), probs["t_center"], rec.counts])
    write_manifest(cfg, out)


def estimate(cfg: ExperimentConfig, out) -> None:
    """Turn the four count files into Stokes samples."""
    out = _prepare(out)
    counts = {d: read_csv(out / counts_file(d)) for d in CAMPAIGN_DIRECTIONS}
    for d, c in counts.items():
        if len(c["count"]) != cfg.M:
            raise LengthMismatchError(
                f"{counts_file(d)} has {len(c['count'])} bins but M = {cfg.M} (direction {d})", d)
    times = counts["z+"]["t_center"]
    for d, c in counts.items():
        if np.any(c["t_center"] != times):
            raise LengthMismatchError(f"{counts_file(d)} bin times differ from counts_z+.csv (direction {d})", d)
    p = {d: c["count"] / cfg.R for d, c in counts.items()}
    grid = TimeGrid(cfg.T_omega, cfg.M)
    samples = estimate_stokes(p["z+"], p["z-"], p["x+"], p["y+"], grid.delta, cfg.gamma0_over_omega, times)
    write_csv(out / STOKES_SAMPLES, ["t", "S0", "S1", "S2", "S3"], [samples.times, *samples.values])
    write_manifest(cfg, out)


def fit(cfg: ExperimentConfig, out, workers: int = 1) -> None:
    """Select a polynomial degree per Stokes index and write the fitted curves."""
    out = _prepare(out)
    data = read_csv(out / STOKES_SAMPLES)
    t = data["t"]
    lo, hi = cfg.degree_range

    def one(l):
        return select_degree(t, data[f"S{l}"], range(lo, hi + 1), cfg.validation_fraction,
                             fit_split_seed(cfg.seed, l), t_max=cfg.T_omega)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=min(workers, 4)) as pool:
            reports = list(pool.map(one, range(4)))
    else:
        reports = [one(l) for l in range(4)]
    write_json(out / FIT_REPORT, {"t_max": cfg.T_omega, "stokes": {f"S{l}": r.to_dict() for l, r in enumerate(reports)}})
    dense = TimeGrid(cfg.T_omega, cfg.M).dense(DENSE_FACTOR)
    write_csv(out / STOKES_FIT, ["t", "S0_hat", "S1_hat", "S2_hat", "S3_hat"],
              [dense, *(r.fit(dense) for r in reports)])
    write_manifest(cfg, out)


def load_model(out) -> RegressionModel:
    rep = read_json(Path(out) / FIT_REPORT)
    try:
        fits = {}
        for l in range(4):
            r = rep["stokes"][f"S{l}"]
            fits[l] = PolynomialFit(int(r["chosen_degree"]), float(r["t_max"]),
                                    np.array(r["legendre_coefficients"], dtype=float), float(r["training_cost"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"{FIT_REPORT} is malformed: {exc}") from None
    return RegressionModel(fits)


def reference_series(cfg: ExperimentConfig, times):
    """Open-system qubit block (RK4) and closed-system evolution on ``times``."""
    ph = Physics.from_config(cfg)
    step = default_step(ph.grid, ph.h, ph.lead)
    traj = propagate(embed(ph.psi0), times, ph.h, ph.lead, step)
    closed = np.stack([evolve_closed(ph.h, ph.rho0, t) for t in times])
    return traj.qubit_block, closed


def reconstruct(cfg: ExperimentConfig, out) -> dict:
    """Assemble rho_hat on the dense grid and compare with the references."""
    out = _prepare(out)
    model = load_model(out)
    dense = TimeGrid(cfg.T_omega, cfg.M).dense(DENSE_FACTOR)
    rho_hat = reconstruct_density(model, dense)
    n_projected = 0
    if cfg.project_psd:
        for i in range(len(dense)):
            rho_hat[i], diag = physicality_check(rho_hat[i], project=True)
            n_projected += diag.projected
    ref, closed = reference_series(cfg, dense)
    report = compare(dense, rho_hat, ref, closed, gamma0=cfg.gamma0_over_omega)
    header, cols = ["t"], [dense]
    for prefix, series in (("", rho_hat), ("ref_", ref), ("closed_", closed)):
        for j, k in ((0, 0), (0, 1), (1, 0), (1, 1)):
            header += [f"{prefix}re_rho{j}{k}", f"{prefix}im_rho{j}{k}"]
            cols += [series[:, j, k].real, series[:, j, k].imag]
    write_csv(out / RHO, header, cols)
    metrics = report.summary()
    metrics["degrees"] = {f"S{l}": d for l, d in model.degrees().items()}
    metrics["project_psd"] = cfg.project_psd
    metrics["n_projected"] = n_projected
    write_json(out / METRICS, metrics)
    write_manifest(cfg, out)
    return metrics


def run_all(cfg: ExperimentConfig, out, workers: int = 1) -> dict:
    simulate(cfg, out)
    sample(cfg, out, workers=workers)
    estimate(cfg, out)
    fit(cfg, out, workers=workers)
    return reconstruct(cfg, out)


def write_manifest(cfg: ExperimentConfig, out: Path) -> None:
    files = {}
    for name in ARTIFACTS:
        p = out / name
        if p.exists():
            files[name] = hashlib.sha256(p.read_bytes()).hexdigest()
    payload = {
        "tool": "spintomo",
        "version": __version__,
        # out_dir is left out so identical runs in different directories match
        "config": cfg.to_dict(include_out_dir=False),
        "seeds": {
            "sample": {d: [cfg.seed, DIRECTION_IDS[d]] for d in CAMPAIGN_DIRECTIONS},
            "shard_size": SHARD_SIZE,
            "fit_split": {f"S{l}": fit_split_seed(cfg.seed, l) for l in range(4)},
        },
        "files": files,
    }
    write_json(out / MANIFEST, payload)
