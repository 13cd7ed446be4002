"""Command-line interface: one subcommand per experiment, plus ``sweep`` and ``verify``.

Exit codes: 0 success, 1 failed run(s) or verification, 2 usage or configuration error.
"""

import argparse
import logging
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError

from app import App
from benchmarks import IdxFormatError, MissingDatasetError
from config import EXPERIMENTS, RunConfig
from experiments import SWEEP_AXES

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

# flag dest -> RunConfig key
OVERRIDES = {
    "param": "param",
    "opt": "opt",
    "lr": "lr",
    "lam": "lambda",
    "batch": "batch",
    "target_batch": "target_batch",
    "iters": "iters",
    "seed": "seed",
    "out": "out",
    "delay": "delay",
}


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="key=value run config file")
    parser.add_argument("--param", choices=["weight", "target-scu", "target-ocu"])
    parser.add_argument("--opt", choices=["sgd", "adam"])
    parser.add_argument("--lr", type=float, help="learning rate")
    parser.add_argument("--lambda", dest="lam", type=float, help="regularization λ")
    parser.add_argument("--batch", type=int, help="minibatch width n_b")
    parser.add_argument("--target-batch", type=int, help="target-space batch width n̄_b")
    parser.add_argument("--iters", type=int, help="iteration budget")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", type=Path, help="output directory")


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsdl", description="Target-space training experiments and verification"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"train on {name}")
        _add_run_flags(p)
        if name in ("bitstream", "adder"):
            p.add_argument("--delay", type=int, help="delay N in steps")
    sweep = sub.add_parser("sweep", help="hyper-parameter sweep")
    _add_run_flags(sweep)
    sweep.add_argument("--experiment", choices=EXPERIMENTS)
    sweep.add_argument("--delay", type=int, help="delay N in steps")
    sweep.add_argument("--axis", choices=SWEEP_AXES, required=True)
    sweep.add_argument("--values", type=_floats, default=[], help="comma-separated values")
    sweep.add_argument("--seeds", type=_ints, default=[0], help="comma-separated seeds")
    verify = sub.add_parser("verify", help="run the verification suites")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--cases", type=int, default=20)
    return parser


def load_run_config(args: argparse.Namespace, experiment: str | None) -> RunConfig:
    overrides: dict[str, Any] = {
        key: getattr(args, dest) for dest, key in OVERRIDES.items() if hasattr(args, dest)
    }
    if experiment is not None:
        overrides["experiment"] = experiment
    return RunConfig.load(args.config, overrides)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    app = App()
    if args.command == "verify":
        results = app.verify(args.seed, args.cases)
        return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED
    experiment = args.experiment if args.command == "sweep" else args.command
    try:
        run_config = load_run_config(args, experiment)
    except (ValidationError, ValueError, FileNotFoundError) as e:
        logger.error("Invalid configuration: %s", e)
        return EXIT_USAGE
    if args.command == "sweep":
        try:
            rows = app.sweep(run_config, args.axis, args.values, args.seeds)
        except (ValidationError, ValueError) as e:
            logger.error("Invalid sweep: %s", e)
            return EXIT_USAGE
        return EXIT_FAILED if any(row.failed_runs for row in rows) else EXIT_OK
    try:
        result = app.run(run_config)
    except (MissingDatasetError, IdxFormatError) as e:
        logger.error("%s", e)
        return EXIT_FAILED
    except np.linalg.LinAlgError:
        logger.exception("%s failed", run_config.run_name)
        return EXIT_FAILED
    except ValueError as e:
        logger.error("Invalid network configuration: %s", e)
        return EXIT_USAGE
    return EXIT_FAILED if result.failed else EXIT_OK
