"""``tomo`` command line.

    tomo <run-all|simulate|sample|estimate|fit|reconstruct> [--config FILE]
         [--seed N] [--out-dir DIR] [--direction D] [--project-psd]
         [--exact-integral] [--workers N] [--<field> VALUE ...]

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure,
4 missing or unreadable files.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import __version__, pipeline
from .config import ExperimentConfig, load_config
from .errors import ConfigError, TomoError
from .events import CAMPAIGN_DIRECTIONS

log = logging.getLogger("spintomo")

DEFAULT_OUT_DIR = "tomo_out"

# config fields settable from the command line, with their argparse shapes
_OVERRIDES = {
    "gamma0_over_omega": dict(type=float),
    "n_hat": dict(type=float, nargs=3),
    "initial_state": dict(type=str),
    "T_omega": dict(type=float),
    "M": dict(type=int),
    "L": dict(type=int),
    "R": dict(type=int),
    "degree_range": dict(type=int, nargs=2),
    "validation_fraction": dict(type=float),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment configuration")
    common.add_argument("--seed", type=int)
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--project-psd", action="store_true", default=None)
    common.add_argument("--exact-integral", action="store_true", default=None)
    common.add_argument("--workers", type=int, default=1, help="threads for sampling and fitting")
    common.add_argument("-v", "--verbose", action="store_true")
    for name, kw in _OVERRIDES.items():
        common.add_argument(f"--{name}", dest=f"set_{name}", metavar=name.upper(), **kw)

    parser = argparse.ArgumentParser(prog="tomo", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run-all", parents=[common], help="run every stage")
    sub.add_parser("simulate", parents=[common], help="integrate dynamics, write probabilities")
    sp = sub.add_parser("sample", parents=[common], help="draw tunneling events")
    sp.add_argument("--direction", action="append", choices=CAMPAIGN_DIRECTIONS,
                    help="campaign to sample (repeatable; default all four)")
    sub.add_parser("estimate", parents=[common], help="counts -> Stokes samples")
    sub.add_parser("fit", parents=[common], help="polynomial fits of the Stokes samples")
    sub.add_parser("reconstruct", parents=[common], help="density matrix and metrics")
    return parser


def resolve_config(args) -> tuple[ExperimentConfig, str]:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    changes = {}
    for name in _OVERRIDES:
        val = getattr(args, f"set_{name}")
        if val is not None:
            changes[name] = val
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.project_psd:
        changes["project_psd"] = True
    if args.exact_integral:
        changes["exact_integral"] = True
    if changes:
        cfg = cfg.replace(**changes)
    out_dir = args.out_dir or cfg.out_dir or os.environ.get("TOMO_OUT_DIR") or DEFAULT_OUT_DIR
    return cfg, out_dir


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.workers < 1:
        print("tomo: error: --workers must be at least 1", file=sys.stderr)
        return ConfigError.exit_code
    try:
        cfg, out = resolve_config(args)
        cmd = args.command
        if cmd == "run-all":
            metrics = pipeline.run_all(cfg, out, workers=args.workers)
            print(json.dumps({k: metrics[k] for k in ("mean_frobenius", "mean_fidelity", "degrees")}))
        elif cmd == "simulate":
            pipeline.simulate(cfg, out)
        elif cmd == "sample":
            pipeline.sample(cfg, out, directions=args.direction, workers=args.workers)
        elif cmd == "estimate":
            pipeline.estimate(cfg, out)
        elif cmd == "fit":
            pipeline.fit(cfg, out, workers=args.workers)
        elif cmd == "reconstruct":
            pipeline.reconstruct(cfg, out)
    except TomoError as exc:
        print(f"tomo: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"tomo: error: {exc}", file=sys.stderr)
        return 4
    log.info("%s finished; artifacts in %s", args.command, out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
