"""Command-line entry point.

Subcommands: two-qubit, ring, ising, locc-check, oracle.  Each accepts
--config (JSON run configuration), --out, --workers, --seed and --strict;
command-line flags override the config file.  Exit codes: 0 success, 1
configuration error, 2 solver failure in strict mode.
"""

from __future__ import annotations

import argparse
import sys

from .config import EXPERIMENTS, ConfigError, load_config
from .sweep import run_experiment

_HELP = {
    "two-qubit": "steady-state sweep of the entangling pair protocol over z",
    "ring": "steady-state sweep of the qubit-ring protocol over z",
    "ising": "steady-state sweep of the dissipative Ising model over (g, alpha)",
    "locc-check": "evaluate the LOCC sufficiency condition of a setup",
    "oracle": "validate the master equation against coarse-grained trajectories",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fmesim",
        description="Feedback-master-equation simulator for interferometric "
        "measurement-and-feedback setups.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=_HELP[name])
        p.add_argument("--config", default=None, help="JSON run configuration")
        p.add_argument("--out", default=None, help="result file path (CSV)")
        p.add_argument("--workers", type=int, default=None, help="worker processes")
        p.add_argument("--seed", type=int, default=None, help="RNG seed (oracle runs)")
        p.add_argument(
            "--strict",
            action="store_const",
            const=True,
            default=None,
            help="exit with status 2 when any grid point fails to solve",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(
            args.experiment,
            config_path=args.config,
            out=args.out,
            seed=args.seed,
            workers=args.workers,
            strict=args.strict,
        )
    except ConfigError as exc:
        print(f"configuration error at {exc.location}: {exc}", file=sys.stderr)
        return 1
    code = run_experiment(config)
    if code == 0:
        print(f"wrote {config.out} and {config.out}.manifest.json")
    else:
        print(f"run finished with failures (exit {code})", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
