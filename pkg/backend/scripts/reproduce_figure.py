#!/usr/bin/env python3
"""
Run the multitask add/mul experiment end to end and check its outcome.

Usage: python reproduce_figure.py [--config run.yaml] [--out out/figure] [--seeds 0 1 2]

Writes the base checkpoint, per-seed subnetworks, training curves, overlap
reports and SVG figures into --out, plus experiment.json with the verdict.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path

sys.path.append(os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src"))

from pydantic import ValidationError

from shared.errors import SubnetSurgeryError
from shared.logging_setup import setup_logging
from subnet_cli.config.run_config import RunConfig
from subnet_cli.experiment import log_verdict, run_experiment

logger = logging.getLogger(__name__)


def main() -> int:
    parser = argparse.ArgumentParser(description="Multitask subnetwork experiment")
    parser.add_argument("--config", type=Path, help="Run configuration (YAML or JSON); defaults otherwise")
    parser.add_argument("--out", type=Path, default=Path("out/figure"), help="Output directory")
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2], help="Discovery seeds")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    args = parser.parse_args()

    setup_logging("DEBUG" if args.verbose else "INFO")
    try:
        config = RunConfig.load(args.config) if args.config else RunConfig.from_dict({})
        logger.info(f"🚀 Running experiment into {args.out} with seeds {args.seeds}")
        report = run_experiment(config, args.out, args.seeds)
    except KeyboardInterrupt:
        logger.error("Interrupted")
        return 130
    except (SubnetSurgeryError, ValidationError, OSError) as e:
        logger.error(f"❌ Experiment failed: {e}")
        return 1

    log_verdict(report)
    with open(args.out / "experiment.json", "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=2, sort_keys=True)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
