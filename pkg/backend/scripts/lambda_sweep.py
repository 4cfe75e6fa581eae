#!/usr/bin/env python3
"""
Sweep the L0 coefficient over a trained checkpoint and report kept entries.

Usage: python lambda_sweep.py --model out/base --task add [--lambdas 0 0.1 1 10] [--out sweep.csv]
"""

import argparse
import logging
import os
import sys
from pathlib import Path

sys.path.append(os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src"))

import pandas as pd
from pydantic import ValidationError

from shared.errors import SubnetSurgeryError
from shared.logging_setup import setup_logging
from model_core.storage.checkpoint import load_checkpoint
from discovery.core.trainer import lambda_sweep
from subnet_cli.config.run_config import RunConfig
from subnet_cli.main import load_datasets

logger = logging.getLogger(__name__)


def main() -> int:
    parser = argparse.ArgumentParser(description="L0 coefficient sweep")
    parser.add_argument("--config", type=Path, help="Run configuration (YAML or JSON)")
    parser.add_argument("--model", required=True, help="Checkpoint stem")
    parser.add_argument("--task", choices=["add", "mul", "all"], default="add")
    parser.add_argument("--lambdas", type=float, nargs="+", default=[0.0, 0.1, 1.0, 10.0])
    parser.add_argument("--out", type=Path, help="Optional CSV of lambda vs kept entries")
    args = parser.parse_args()

    setup_logging("INFO")
    try:
        config = RunConfig.load(args.config) if args.config else RunConfig.from_dict({})
        discovery = config.discovery.model_validate(
            {**config.discovery.model_dump(), "task": args.task, "seed": config.seed})
        train, _ = load_datasets(config)
        sweep = lambda_sweep(load_checkpoint(args.model), train, discovery, args.lambdas)
    except KeyboardInterrupt:
        logger.error("Interrupted")
        return 130
    except (SubnetSurgeryError, ValidationError, OSError) as e:
        logger.error(f"❌ Sweep failed: {e}")
        return 1

    frame = pd.DataFrame({"l0_lambda": sweep.lambdas, "kept": sweep.kept})
    print(frame.to_string(index=False))
    if args.out:
        frame.to_csv(args.out, index=False)
        logger.info(f"Wrote {args.out}")

    status = "✅" if sweep.shows_pressure else "⚠️"
    logger.info(f"{status} Spearman(lambda, kept) = {sweep.spearman:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
