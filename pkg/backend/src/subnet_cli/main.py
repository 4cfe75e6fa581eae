"""
Command-line pipeline: train a base model, discover subnetworks, evaluate,
compare and draw them.

    subnet-surgery --config run.yaml train-base --out out/base
    subnet-surgery discover --model out/base --task add --out out/add.subnet.json
    subnet-surgery eval --model out/base --mask out/add.subnet.json --mode subnet --task add
    subnet-surgery stats out/add.subnet.json out/mul.subnet.json --out out/overlap
    subnet-surgery viz out/add.subnet.json out/mul.subnet.json --model out/base --out out/figure
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from pydantic import ValidationError

from shared.errors import ConfigurationError, NonFiniteLossError, SubnetSurgeryError
from shared.logging_setup import setup_logging
from shared.rng import named_generator, named_seed
from model_core.core.base import Model
from model_core.core.mlp import build_mlp
from model_core.core.training import train_base
from model_core.core.transformer import build_transformer
from model_core.storage.checkpoint import load_checkpoint, read_manifest, save_checkpoint
from masking.config.mask_config import Granularity, MaskStrategy
from discovery.core.evaluator import EvalMode, evaluate
from discovery.core.probe import ProbeHead
from discovery.core.trainer import baseline_discover, discover, probe_discover
from arithmetic_tasks.core.generator import filter_task, generate
from arithmetic_tasks.models.dataset import TaskDataset, TaskName
from subnetwork.core.overlap import OverlapReport, overlap
from subnetwork.storage.serialization import load_subnetwork, save_subnetwork
from subnet_viz.core.grid_renderer import VizSpec, render
from subnet_viz.core.summary_chart import render_summary
from .config.run_config import Architecture, RunConfig

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
TASK_CHOICES = ["add", "mul", "all"]


def _strip_suffix(path: PathLike, suffixes: Sequence[str]) -> Path:
    path = Path(path)
    for suffix in suffixes:
        if path.name.endswith(suffix):
            return path.with_name(path.name[: -len(suffix)])
    return path


def _sibling(stem: Path, suffix: str) -> Path:
    return stem.with_name(stem.name + suffix)


def probe_head_path(mask_path: PathLike) -> Path:
    """Trained probe head stored next to its .subnet.json."""
    return _sibling(_strip_suffix(mask_path, (".subnet.json", ".json")), ".probe.npz")


def _write_json(path: Path, document: Dict[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2, sort_keys=True)
    logger.info(f"Wrote {path}")
    return path


def load_datasets(config: RunConfig) -> Tuple[TaskDataset, TaskDataset]:
    """Train/test split regenerated from the run config and the data-split stream."""
    return generate(config.task.modulus, named_seed(config.seed, "data-split"), config.task.split_fraction)


def _task_slice(data: TaskDataset, task: str) -> TaskDataset:
    return data if task == "all" else filter_task(data, TaskName(task))


def build_model(config: RunConfig) -> Model:
    seed = named_seed(config.seed, "base-train")
    if config.architecture == Architecture.MLP:
        return build_mlp(config.mlp, seed)
    return build_transformer(config.model, seed)


def accuracy_table(model: Model, train: TaskDataset, test: TaskDataset) -> Dict[str, Dict[str, float]]:
    """Full-model accuracy per task and split."""
    table = {}
    for task in TASK_CHOICES:
        table[task] = {
            split: evaluate(model, None, _task_slice(data, task), EvalMode.FULL).accuracy
            for split, data in (("train", train), ("test", test))
        }
    return table


# Commands

def cmd_train_base(config: RunConfig, out_path: PathLike) -> int:
    train, test = load_datasets(config)
    model = build_model(config)
    stem = _strip_suffix(out_path, (".json", ".bin"))

    try:
        report = train_base(model, train, config.base_training, named_generator(config.seed, "base-train"))
    except NonFiniteLossError as e:
        model.freeze()
        save_checkpoint(model, stem)
        logger.error(f"❌ {e}; last good weights saved to {stem}")
        return 1

    save_checkpoint(model, stem)
    metrics = {
        "fingerprint": model.fingerprint(),
        "seed": config.seed,
        "training": report.to_dict(),
        "accuracy": accuracy_table(model, train, test),
    }
    _write_json(_sibling(stem, ".metrics.json"), metrics)

    add_train = metrics["accuracy"]["add"]["train"]
    mul_train = metrics["accuracy"]["mul"]["train"]
    logger.info(f"✅ Base model trained in {report.epochs_run} epochs "
                f"(train accuracy add {add_train:.4f}, mul {mul_train:.4f})")
    return 0


def cmd_discover(config: RunConfig, model_path: PathLike, out_path: PathLike) -> int:
    model = load_checkpoint(model_path)
    train, _ = load_datasets(config)
    discovery_config = config.discovery.model_copy(update={"seed": config.seed})

    if discovery_config.mask.strategy == MaskStrategy.MAGNITUDE:
        logger.warning(f"Magnitude pruning is not trained; epochs={discovery_config.epochs} ignored")
        result = baseline_discover(model, discovery_config, train)
    elif discovery_config.probe_mode:
        result = probe_discover(model, train, discovery_config)
    else:
        result = discover(model, train, discovery_config)

    out = Path(out_path)
    if not out.name.endswith(".subnet.json"):
        out = _sibling(out, ".subnet.json")
    save_subnetwork(result.subnetwork, out)
    curve_path = result.write_curve(_sibling(_strip_suffix(out, (".subnet.json",)), ".curve.csv"))
    logger.info(f"Wrote {curve_path}")
    if result.probe_head is not None:
        head_path = result.probe_head.save(probe_head_path(out))
        logger.info(f"Wrote {head_path}")

    logger.info(f"✅ Subnetwork keeps {result.metrics['kept']}/{result.metrics['total']} entries "
                f"(sparsity {result.metrics['sparsity']:.4f})")
    return 0


def cmd_eval(config: RunConfig, model_path: PathLike, mask_path: Optional[PathLike], mode: str,
             split: str, task: str, out_path: Optional[PathLike] = None) -> Dict[str, Any]:
    mode = EvalMode(mode)
    if mode != EvalMode.FULL and mask_path is None:
        raise ConfigurationError(f"--mode {mode.value} requires --mask")

    model = load_checkpoint(model_path)
    subnetwork = load_subnetwork(mask_path) if mask_path is not None else None
    train, test = load_datasets(config)
    data = _task_slice(train if split == "train" else test, task)

    probe_head = None
    if subnetwork is not None and subnetwork.metadata.get("probe_mode"):
        head_path = probe_head_path(mask_path)
        if head_path.exists():
            probe_head = ProbeHead.load(head_path)
        else:
            logger.warning(f"⚠️ {mask_path} was discovered with a probe head but {head_path} is missing; "
                           f"scoring with the model's own unembedding")

    result = evaluate(model, subnetwork, data, mode, probe_head)
    document = {"mode": mode.value, "split": split, "task": task,
                "fingerprint": model.fingerprint(), **result.to_dict()}
    print(f"{mode.value} {task}/{split}: accuracy {result.accuracy:.6f}, loss {result.loss:.6f} "
          f"({result.n_examples} examples)")
    if out_path is not None:
        _write_json(Path(out_path), document)
    return document


def cmd_stats(mask_a: PathLike, mask_b: PathLike, out_path: PathLike) -> OverlapReport:
    report = overlap(load_subnetwork(mask_a), load_subnetwork(mask_b))
    stem = _strip_suffix(out_path, (".json", ".csv"))
    report.write_json(_sibling(stem, ".json"))
    report.write_csv(_sibling(stem, ".csv"))
    logger.info(f"Wrote {_sibling(stem, '.json')} and {_sibling(stem, '.csv')}")
    print(report.summary_table())
    return report


def cmd_viz(mask_a: PathLike, mask_b: Optional[PathLike], model_path: PathLike,
            out_path: PathLike) -> List[Path]:
    a = load_subnetwork(mask_a)
    b = load_subnetwork(mask_b) if mask_b is not None else None
    manifest = read_manifest(model_path)

    figure = render(VizSpec(subnetwork_a=a, subnetwork_b=b), manifest)
    report = overlap(a, b if b is not None else a)
    summary = render_summary(report, single=b is None)

    stem = _strip_suffix(out_path, (".svg",))
    written = []
    for path, text in ((_sibling(stem, ".svg"), figure.svg), (_sibling(stem, ".summary.svg"), summary)):
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info(f"Wrote {path}")
        written.append(path)
    written.append(_write_json(_sibling(stem, ".json"), {**figure.sidecar, "overlap": report.to_dict()}))
    return written


# Argument parsing

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subnet-surgery",
                                     description="Discover and compare functional subnetworks of small models")
    parser.add_argument("--config", type=Path, help="Run configuration (YAML or JSON)")
    parser.add_argument("--seed", type=int, help="Root seed of every random stream")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    parser.add_argument("--log-format", choices=["text", "json"], help="Log line format")
    commands = parser.add_subparsers(dest="command", required=True)

    train = commands.add_parser("train-base", help="Train the base model on every task")
    train.add_argument("--out", required=True, help="Checkpoint stem (writes .json, .bin, .metrics.json)")
    train.add_argument("--architecture", choices=[a.value for a in Architecture])
    train.add_argument("--epochs", type=int)
    train.add_argument("--learning-rate", type=float)

    disc = commands.add_parser("discover", help="Discover a subnetwork for one task")
    disc.add_argument("--model", required=True, help="Checkpoint stem or manifest path")
    disc.add_argument("--task", choices=TASK_CHOICES)
    disc.add_argument("--out", required=True, help="Output .subnet.json path")
    disc.add_argument("--strategy", choices=[s.value for s in MaskStrategy])
    disc.add_argument("--granularity", choices=[g.value for g in Granularity])
    disc.add_argument("--l0-lambda", type=float)
    disc.add_argument("--epochs", type=int)
    disc.add_argument("--prune-fraction", type=float)
    disc.add_argument("--probe", action="store_true", default=None, help="Joint mask and linear-probe training")

    ev = commands.add_parser("eval", help="Accuracy and loss of a model or subnetwork")
    ev.add_argument("--model", required=True)
    ev.add_argument("--mask", help=".subnet.json for subnet/complement modes")
    ev.add_argument("--mode", choices=[m.value for m in EvalMode], default=EvalMode.FULL.value)
    ev.add_argument("--split", choices=["train", "test"], default="test")
    ev.add_argument("--task", choices=TASK_CHOICES, default="all")
    ev.add_argument("--out", help="Optional metrics JSON path")

    stats = commands.add_parser("stats", help="Overlap report of two subnetworks")
    stats.add_argument("mask_a")
    stats.add_argument("mask_b")
    stats.add_argument("--out", required=True, help="Report stem (writes .json and .csv)")

    viz = commands.add_parser("viz", help="Draw one or two subnetworks")
    viz.add_argument("mask_a")
    viz.add_argument("mask_b", nargs="?")
    viz.add_argument("--model", required=True, help="Checkpoint the subnetworks belong to")
    viz.add_argument("--out", required=True, help="Figure stem (writes .svg, .summary.svg, .json)")
    return parser


def flag_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Dotted config paths set by command-line flags; None means not given."""
    flags: Dict[str, Any] = {"seed": args.seed}
    if args.log_format is not None:
        flags["logging.json"] = args.log_format == "json"
    if args.verbose:
        flags["logging.level"] = "DEBUG"

    if args.command == "train-base":
        flags.update({
            "architecture": args.architecture,
            "base_training.epochs": args.epochs,
            "base_training.learning_rate": args.learning_rate,
        })
    elif args.command == "discover":
        flags.update({
            "discovery.task": args.task,
            "discovery.mask.strategy": args.strategy,
            "discovery.mask.granularity": args.granularity,
            "discovery.l0_lambda": args.l0_lambda,
            "discovery.epochs": args.epochs,
            "discovery.mask.prune_fraction": args.prune_fraction,
            "discovery.probe_mode": args.probe,
        })
    return flags


def load_run_config(args: argparse.Namespace) -> RunConfig:
    base = RunConfig.load(args.config) if args.config is not None else RunConfig.from_dict({})
    return base.with_overrides(flag_overrides(args))


def run(args: argparse.Namespace) -> int:
    config = load_run_config(args)
    setup_logging(config.logging.level, config.logging.json_format)
    config.log_overrides()

    if args.command == "train-base":
        return cmd_train_base(config, args.out)
    if args.command == "discover":
        return cmd_discover(config, args.model, args.out)
    if args.command == "eval":
        cmd_eval(config, args.model, args.mask, args.mode, args.split, args.task, args.out)
        return 0
    if args.command == "stats":
        cmd_stats(args.mask_a, args.mask_b, args.out)
        return 0
    if args.command == "viz":
        cmd_viz(args.mask_a, args.mask_b, args.model, args.out)
        return 0
    raise ConfigurationError(f"Unknown command {args.command}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging("DEBUG" if args.verbose else "INFO", args.log_format == "json")

    try:
        return run(args)
    except KeyboardInterrupt:
        logger.error("Interrupted")
        return 130
    except (SubnetSurgeryError, ValidationError, OSError) as e:
        logger.error(f"❌ {args.command} failed: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
