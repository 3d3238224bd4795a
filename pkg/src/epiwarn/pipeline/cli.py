"""Command-line interface.

Subcommands: simulate | experiment | sweep | classify-empirical |
mwu-features.  Every option can come from an INI config file; flags win.
Worker count can also be set via the EPIWARN_WORKERS environment
variable.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .config import ConfigError, load_config
from . import runner


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="INI config file")
    parser.add_argument("--seed", type=int, help="run seed (overrides config)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--desk-scale", action="store_true", default=None,
                        help="desk preset: 600 train + 150 test per class, white+env noise")
    parser.add_argument("--noise", help="comma list: white,env,dem,mixed")
    parser.add_argument("--features", help="comma list: 22,5")
    parser.add_argument("--models", help="comma list: GBM,LRM,KNN,SVM")
    parser.add_argument("--train-per-class", type=int, dest="train_per_class")
    parser.add_argument("--test-per-class", type=int, dest="test_per_class")
    parser.add_argument("--workers", type=int, help="worker processes (or EPIWARN_WORKERS)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epiwarn",
        description="Simulate outbreak/non-outbreak incidence, train classifiers, "
        "run earliness sweeps, and classify empirical data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate trajectory CSVs per noise kind")
    _add_common(p)

    p = sub.add_parser("experiment", help="train/evaluate the classifier grid")
    _add_common(p)
    p.add_argument("--trajectories", dest="trajectories_dir",
                   help="load trajectories from this directory instead of simulating")

    p = sub.add_parser("sweep", help="rolling/expanding earliness sweep")
    _add_common(p)
    p.add_argument("--sweep-kind", choices=["rolling", "expanding"], dest="sweep_kind")

    p = sub.add_parser("classify-empirical", help="apply stored models to empirical CSVs")
    _add_common(p)
    p.add_argument("--models-dir", dest="models_dir", help="directory of stored model JSONs")

    p = sub.add_parser("mwu-features", help="per-feature rank tests between labels")
    _add_common(p)
    p.add_argument("--features-dir", dest="features_dir",
                   help="directory of stored feature matrices")
    return parser


_OVERRIDE_KEYS = (
    "seed",
    "out",
    "noise",
    "features",
    "models",
    "train_per_class",
    "test_per_class",
    "workers",
    "sweep_kind",
    "trajectories_dir",
    "models_dir",
    "features_dir",
    "desk_scale",
)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: getattr(args, k, None) for k in _OVERRIDE_KEYS}
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"epiwarn: config error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "simulate":
            paths = runner.run_simulate(cfg)
            for p in paths:
                print(p)
        elif args.command == "experiment":
            print(runner.run_experiment(cfg))
        elif args.command == "sweep":
            print(runner.run_sweep(cfg))
        elif args.command == "classify-empirical":
            print(runner.run_classify_empirical(cfg))
        elif args.command == "mwu-features":
            print(runner.run_mwu_features(cfg))
    except ConfigError as exc:
        print(f"epiwarn: config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"epiwarn: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime/stage failure: nonzero exit with message
        print(f"epiwarn: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
