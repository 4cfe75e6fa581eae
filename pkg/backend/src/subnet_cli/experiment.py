"""
End-to-end multitask experiment: train the base model on addition and
multiplication, discover one hard-concrete subnetwork per task across several
seeds, compare them and draw the figures.
"""

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Union

from shared.errors import ConfigurationError
from shared.rng import named_generator
from model_core.core.training import train_base
from model_core.storage.checkpoint import save_checkpoint
from masking.config.mask_config import MaskStrategy
from discovery.config.discovery_config import DiscoveryConfig
from discovery.core.evaluator import EvalMode, evaluate
from discovery.core.trainer import discover
from subnetwork.core.overlap import overlap
from subnetwork.storage.serialization import save_subnetwork
from subnet_viz.core.grid_renderer import VizSpec, render
from subnet_viz.core.summary_chart import render_summary
from .config.run_config import RunConfig
from .main import _task_slice, accuracy_table, build_model, load_datasets

logger = logging.getLogger(__name__)

TASKS = ("add", "mul")


@dataclass
class TaskOutcome:
    task: str
    accuracy: float
    full_accuracy: float
    sparsity: float

    @property
    def retention(self) -> float:
        return self.accuracy / self.full_accuracy if self.full_accuracy else 0.0


@dataclass
class SeedOutcome:
    seed: int
    tasks: Dict[str, TaskOutcome]
    block_jaccard: Dict[int, float]
    files: List[str] = field(default_factory=list)

    def retains_accuracy(self, threshold: float) -> bool:
        return all(t.retention >= threshold for t in self.tasks.values())

    def mostly_pruned(self, threshold: float) -> bool:
        return all(t.sparsity >= threshold for t in self.tasks.values())

    @property
    def early_block_overlaps_more(self) -> bool:
        return self.block_jaccard.get(0, 0.0) > self.block_jaccard.get(1, 0.0)


@dataclass
class ExperimentReport:
    train_accuracy: Dict[str, float]
    seeds: List[SeedOutcome]
    min_train_accuracy: float = 0.99
    min_retention: float = 0.90
    min_sparsity: float = 0.5
    min_passing_seeds: int = 2

    @property
    def base_trained(self) -> bool:
        return all(acc >= self.min_train_accuracy for acc in self.train_accuracy.values())

    @property
    def passing_seeds(self) -> List[int]:
        return [s.seed for s in self.seeds
                if s.retains_accuracy(self.min_retention) and s.mostly_pruned(self.min_sparsity)]

    @property
    def passed(self) -> bool:
        return self.base_trained and len(self.passing_seeds) >= self.min_passing_seeds

    def to_dict(self) -> dict:
        document = asdict(self)
        document.update(base_trained=self.base_trained, passing_seeds=self.passing_seeds, passed=self.passed)
        return document


def run_experiment(config: RunConfig, out_dir: Union[str, Path],
                   seeds: Sequence[int] = (0, 1, 2)) -> ExperimentReport:
    """Train once, then discover and compare per-task subnetworks for every discovery seed."""
    if config.discovery.probe_mode or config.discovery.mask.strategy == MaskStrategy.MAGNITUDE:
        raise ConfigurationError("The experiment discovers learned masks without a probe")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    train, test = load_datasets(config)
    model = build_model(config)
    training = train_base(model, train, config.base_training, named_generator(config.seed, "base-train"))
    model.freeze()
    save_checkpoint(model, out_dir / "base")
    table = accuracy_table(model, train, test)
    train_accuracy = {task: table[task]["train"] for task in TASKS}
    logger.info(f"Base model: {training.epochs_run} epochs, train accuracy {train_accuracy}")

    outcomes = []
    for seed in seeds:
        subnetworks = {}
        tasks = {}
        for task in TASKS:
            discovery_config = DiscoveryConfig.model_validate(
                {**config.discovery.model_dump(), "seed": seed, "task": task})
            result = discover(model, train, discovery_config)

            task_data = _task_slice(train, task)
            subnet = evaluate(model, result.subnetwork, task_data, EvalMode.SUBNET)
            full = evaluate(model, None, task_data, EvalMode.FULL)
            tasks[task] = TaskOutcome(task, subnet.accuracy, full.accuracy, result.metrics["sparsity"])
            subnetworks[task] = result.subnetwork

            stem = out_dir / f"seed{seed}-{task}"
            save_subnetwork(result.subnetwork, stem.with_name(stem.name + ".subnet.json"))
            result.write_curve(stem.with_name(stem.name + ".curve.csv"))

        report = overlap(subnetworks["add"], subnetworks["mul"])
        stem = out_dir / f"seed{seed}-overlap"
        report.write_csv(stem.with_name(stem.name + ".csv"))
        report.write_json(stem.with_name(stem.name + ".json"))

        figure = render(VizSpec(subnetworks["add"], subnetworks["mul"]), model.manifest())
        figure_path = out_dir / f"seed{seed}-figure.svg"
        figure_path.write_text(figure.svg, encoding="utf-8")
        summary_path = out_dir / f"seed{seed}-figure.summary.svg"
        summary_path.write_text(render_summary(report), encoding="utf-8")

        blocks = {index: row.jaccard for index, row in report.block_totals().items()}
        outcome = SeedOutcome(seed, tasks, blocks, [str(figure_path), str(summary_path)])
        outcomes.append(outcome)
        logger.info(f"Seed {seed}: " + ", ".join(
            f"{t.task} retention {t.retention:.3f} sparsity {t.sparsity:.3f}" for t in tasks.values()
        ) + f", block jaccard {blocks}")

    return ExperimentReport(train_accuracy=train_accuracy, seeds=outcomes)


def log_verdict(report: ExperimentReport) -> None:
    """One line per acceptance condition; the block overlap ordering only warns."""
    status = "✅" if report.base_trained else "❌"
    logger.info(f"{status} Base train accuracy {report.train_accuracy} (need >= {report.min_train_accuracy})")
    for outcome in report.seeds:
        retained = outcome.retains_accuracy(report.min_retention)
        pruned = outcome.mostly_pruned(report.min_sparsity)
        logger.info(f"{'✅' if retained else '❌'} Seed {outcome.seed}: subnetworks keep "
                    f">= {report.min_retention:.0%} of full accuracy")
        logger.info(f"{'✅' if pruned else '❌'} Seed {outcome.seed}: sparsity >= {report.min_sparsity}")
        if not outcome.early_block_overlaps_more:
            logger.warning(f"⚠️ Seed {outcome.seed}: layer 0 overlap {outcome.block_jaccard.get(0, 0.0):.3f} "
                           f"is not above layer 1 overlap {outcome.block_jaccard.get(1, 0.0):.3f}")
    passing = report.passing_seeds
    status = "✅" if report.passed else "❌"
    logger.info(f"{status} {len(passing)}/{len(report.seeds)} seeds pass (need {report.min_passing_seeds})")
