"""Command-line entry point: ``mslocal <experiment> [--config file.json] [overrides]``."""

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

import logging
from dotenv import load_dotenv
from pydantic import ValidationError

from mslocal.harness import run_experiment
from mslocal.harness.report import write_report
from mslocal.harness.schemas import ExperimentConfig, ExperimentKind
from mslocal.numerics.errors import ConfigError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAILURES = 2

# flag name -> config field
OVERRIDES = {
    "dims": "dims",
    "j0": "j0",
    "samples": "num_samples",
    "seed": "master_seed",
    "out": "output",
    "delta": "delta",
    "max_steps": "max_steps",
    "epsilon": "epsilon",
    "workers": "workers",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mslocal",
        description="Monte Carlo experiments for the multi-scale Jacobi diagonalization of the Anderson model.",
    )
    parser.add_argument("experiment", choices=[kind.value for kind in ExperimentKind])
    parser.add_argument("--config", type=Path, help="JSON file with ExperimentConfig fields")
    parser.add_argument("--dims", type=int, nargs="+", help="box side lengths, one per dimension")
    parser.add_argument("--j0", type=float, help="hopping strength J0")
    parser.add_argument("--samples", type=int, help="number of disorder samples")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--out", type=str, help="CSV report path")
    parser.add_argument("--delta", type=float, help="resonance exponent, epsilon = J0**delta")
    parser.add_argument("--epsilon", type=float, help="explicit epsilon, overrides delta")
    parser.add_argument("--max-steps", dest="max_steps", type=int, help="scale-step budget")
    parser.add_argument("--workers", type=int, help="worker processes")
    parser.add_argument("--record", action="store_true", help="record the run in the SQL ledger")
    parser.add_argument("-v", "--verbose", action="store_true", help="per-step debug logging")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge the config file (if any) with command-line overrides and validate."""
    fields = {}
    if args.config is not None:
        try:
            fields = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from e
        if not isinstance(fields, dict):
            raise ConfigError(f"config {args.config} must hold a JSON object")
    fields["experiment"] = args.experiment
    for flag, name in OVERRIDES.items():
        value = getattr(args, flag)
        if value is not None:
            fields[name] = value
    try:
        return ExperimentConfig.model_validate(fields)
    except ValidationError as e:
        raise ConfigError(str(e)) from e


def record_run(report, output_path: Optional[str]) -> str:
    from mslocal.db import crud
    from mslocal.db.models import SessionLocal, create_tables

    create_tables()
    db = SessionLocal()
    try:
        return crud.create_run(db, report, output_path=output_path).id
    finally:
        db.close()


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)

    try:
        cfg = load_config(args)
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG

    report = run_experiment(cfg)
    output = cfg.output or f"{cfg.experiment.value}.csv"
    write_report(report, output)
    if args.record:
        run_id = record_run(report, output)
        logger.info(f"Recorded run {run_id}")

    if report.failures and report.failure_fraction > cfg.failure_threshold:
        logger.error(
            f"{len(report.failures)} of {cfg.num_samples} samples failed "
            f"(fraction {report.failure_fraction:.3f} > threshold {cfg.failure_threshold})"
        )
        return EXIT_FAILURES
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
