"""
Subnetwork discovery over frozen weights.

Every maskable layer of the model is wrapped in a MaskedLayer and only the mask
parameters (plus, in probe mode, a fresh linear head) are optimized against the
answer-position cross-entropy plus the normalized L0 penalty.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import spearmanr

from shared.errors import ConfigurationError, ModelNotFrozenError, NonFiniteLossError
from shared.rng import named_generator
from tensor_engine import Adam, Tensor
from tensor_engine.core import functional as F
from model_core.core.base import Model
from model_core.core.training import iterate_batches
from masking.config.mask_config import MaskStrategy
from masking.core.masked_layer import MaskedLayer
from masking.core.strategies import AnnealState, magnitude_mask
from subnetwork.models.subnetwork import Subnetwork
from arithmetic_tasks.core.generator import filter_task
from arithmetic_tasks.models.dataset import TaskDataset
from ..config.discovery_config import DiscoveryConfig
from ..models.results import DiscoveryResult, EpochRecord, SweepResult
from .evaluator import EvalMode, evaluate
from .probe import ProbeHead

logger = logging.getLogger(__name__)


def check_frozen(model: Model) -> None:
    if not model.frozen or any(p.requires_grad for p in model.parameters()):
        raise ModelNotFrozenError("Discovery requires a frozen model; call model.freeze() first")


def check_weights_unchanged(model: Model, snapshot: Dict[str, np.ndarray]) -> None:
    changed = [name for name, tensor in model.named_parameters().items()
               if not np.array_equal(tensor.data, snapshot[name])]
    if changed:
        raise ModelNotFrozenError(f"Base weights changed during discovery: {changed}")


def wrap_model(model: Model, config: DiscoveryConfig) -> Tuple[Model, Dict[str, MaskedLayer]]:
    """Masked copy of `model`; the original keeps its own layers."""
    layers = {}
    for layer_id in model.maskable_layer_ids():
        base = model.layers[layer_id]
        fixed = None
        if config.freeze_masks:
            fixed = np.ones(model.mask_shape(layer_id, config.mask.granularity.value))
        layers[str(layer_id)] = MaskedLayer(base, config.mask, fixed_mask=fixed)
    return model.with_layers(layers), layers


def select_task(data: TaskDataset, config: DiscoveryConfig) -> TaskDataset:
    return data if config.task is None else filter_task(data, config.task)


def soft_sparsity(layers: Dict[str, MaskedLayer]) -> float:
    kept = sum(float(layer.expected_mask().sum()) for layer in layers.values())
    total = sum(layer.n_entries for layer in layers.values())
    return 1.0 - kept / total


def binarized_fraction(layers: Dict[str, MaskedLayer], tolerance: float = 1e-3) -> float:
    """Share of soft mask entries within `tolerance` of 0 or 1."""
    soft = np.concatenate([np.ravel(layer.expected_mask()) for layer in layers.values()])
    return float(np.mean(np.minimum(soft, 1.0 - soft) <= tolerance))


def _metadata(model: Model, config: DiscoveryConfig, strategy: str) -> dict:
    return {
        "strategy": strategy,
        "task": config.task.value if config.task is not None else "all",
        "seed": config.seed,
        "l0_lambda": config.mask.l0_lambda,
        "probe_mode": config.probe_mode,
        "architecture": model.architecture,
        "config": config.model_dump(mode="json"),
    }


def _to_subnetwork(model: Model, config: DiscoveryConfig, masks: Dict[str, np.ndarray],
                   strategy: str, **extra) -> Subnetwork:
    return Subnetwork(
        fingerprint=model.fingerprint(),
        granularity=config.mask.granularity,
        masks=masks,
        n_heads=model.n_heads,
        metadata={**_metadata(model, config, strategy), **extra},
    )


def _summary_metrics(model: Model, subnetwork: Subnetwork, data: TaskDataset,
                     probe_head: Optional[ProbeHead] = None) -> dict:
    result = evaluate(model, subnetwork, data, EvalMode.SUBNET, probe_head)
    kept, total = subnetwork.kept(), subnetwork.total()
    metrics = {
        "subnet_accuracy": result.accuracy,
        "subnet_loss": result.loss,
        "kept": kept,
        "total": total,
        "sparsity": 1.0 - kept / total,
    }
    if probe_head is not None:
        metrics["probe_accuracy"] = result.accuracy
    return metrics


def _run_mask_training(model: Model, data: TaskDataset, config: DiscoveryConfig,
                       probe: bool) -> DiscoveryResult:
    check_frozen(model)
    if config.mask.strategy == MaskStrategy.MAGNITUDE:
        raise ConfigurationError("Magnitude pruning is not trained; use baseline_discover")
    data = select_task(data, config)
    if len(data) == 0:
        raise ConfigurationError("Discovery data is empty")

    snapshot = model.weight_snapshot()
    rng = named_generator(config.seed, "discovery")
    masked_model, layers = wrap_model(model, config)

    steps_per_epoch = 1 if config.batch_size is None else math.ceil(len(data) / config.batch_size)
    anneal = None
    if config.mask.strategy == MaskStrategy.CONTINUOUS_SPARSIFICATION:
        anneal = AnnealState(config.mask.cs_beta_final, config.epochs * steps_per_epoch)
    for layer in layers.values():
        layer.rng = rng
        layer.anneal = anneal
        layer.train()

    mask_params = [p for layer in layers.values() for p in layer.trainable_parameters()]
    optimizers: List[Adam] = []
    if mask_params:
        optimizers.append(Adam(mask_params, lr=config.learning_rate))

    probe_head = None
    if probe:
        probe_head = ProbeHead.init(model.hidden_width, model.vocab_size,
                                    named_generator(config.seed, "probe-init"))
        optimizers.append(Adam(probe_head.parameters(), lr=config.probe_learning_rate))

    n_entries = sum(layer.n_entries for layer in layers.values())
    l0_lambda = config.mask.l0_lambda
    curve: List[EpochRecord] = []

    logger.info(
        f"Discovering {config.mask.strategy.value} subnetwork "
        f"({config.mask.granularity.value} granularity, l0_lambda={l0_lambda}, "
        f"{'probe, ' if probe else ''}{len(data)} examples, {config.epochs} epochs)"
    )

    for epoch in range(1, config.epochs + 1):
        sums = np.zeros(3)
        for step, rows in enumerate(iterate_batches(len(data), config.batch_size, rng)):
            for optimizer in optimizers:
                optimizer.zero_grad()

            tokens, positions = data.tokens[rows], data.answer_positions[rows]
            if probe_head is not None:
                logits = probe_head.forward(masked_model.answer_hidden(tokens, positions))
            else:
                logits = masked_model.answer_logits(tokens, positions)
            task_loss = F.softmax_cross_entropy(logits, data.answers[rows])
            l0_value = sum((layer.l0_penalty() for layer in layers.values()), Tensor(0.0)) * (1.0 / n_entries)
            total = task_loss + l0_value * l0_lambda

            if not np.isfinite(total.item()):
                bad = sum(int((~np.isfinite(p.data)).sum()) for p in mask_params)
                raise NonFiniteLossError(
                    "Non-finite discovery loss",
                    {"epoch": epoch, "step": step, "task_loss": task_loss.item(),
                     "l0_value": l0_value.item(), "non_finite_mask_params": bad},
                )

            total.backward()
            for optimizer in optimizers:
                optimizer.step()
            if anneal is not None:
                anneal.advance()

            weight = len(rows) / len(data)
            sums += weight * np.array([task_loss.item(), l0_value.item(), total.item()])

        record = EpochRecord(epoch, float(sums[0]), float(sums[1]), float(sums[2]), soft_sparsity(layers))
        curve.append(record)
        if epoch % config.log_every == 0 or epoch == config.epochs:
            logger.info(f"Epoch {epoch}: task {record.task_loss:.4f}, l0 {record.l0_value:.4f}, "
                        f"soft sparsity {record.soft_sparsity:.3f}")

    binarized = binarized_fraction(layers) if anneal is not None else None
    for layer in layers.values():
        layer.eval()
    masks = {layer_id: layer.final_mask() for layer_id, layer in layers.items()}
    subnetwork = _to_subnetwork(model, config, masks, config.mask.strategy.value)

    check_weights_unchanged(model, snapshot)
    metrics = _summary_metrics(model, subnetwork, data, probe_head)
    if binarized is not None:
        metrics["binarized_fraction"] = binarized
        logger.info(f"Soft mask at beta {anneal.current_beta:.1f}: {binarized:.4f} of entries within 1e-3 of 0 or 1")
    logger.info(f"Discovered subnetwork keeps {metrics['kept']}/{metrics['total']} entries "
                f"(sparsity {metrics['sparsity']:.3f}), accuracy {metrics['subnet_accuracy']:.4f}")
    return DiscoveryResult(subnetwork=subnetwork, curve=curve, metrics=metrics, probe_head=probe_head)


def discover(model: Model, data: TaskDataset, config: DiscoveryConfig) -> DiscoveryResult:
    """Optimize hard-concrete or continuous-sparsification masks over a frozen model."""
    if config.probe_mode:
        raise ConfigurationError("probe_mode is set; use probe_discover")
    return _run_mask_training(model, data, config, probe=False)


def probe_discover(model: Model, data: TaskDataset, config: DiscoveryConfig) -> DiscoveryResult:
    """Jointly train masks and a linear probe on the answer-position representation."""
    if not config.probe_mode:
        raise ConfigurationError("probe_discover requires probe_mode")
    return _run_mask_training(model, data, config, probe=True)


def baseline_discover(model: Model, config: DiscoveryConfig,
                      data: Optional[TaskDataset] = None) -> DiscoveryResult:
    """Per-layer magnitude pruning; no training occurs."""
    check_frozen(model)
    mask_config = config.mask
    if mask_config.strategy != MaskStrategy.MAGNITUDE:
        raise ConfigurationError(f"baseline_discover needs the magnitude strategy, got {mask_config.strategy.value}")
    if mask_config.prune_fraction is None:
        raise ConfigurationError("Magnitude pruning requires prune_fraction")

    masks = {}
    for layer_id in model.maskable_layer_ids():
        weight = model.layers[layer_id].parameters()["weight"]
        masks[str(layer_id)] = magnitude_mask(weight, mask_config.prune_fraction, mask_config.granularity).data
    subnetwork = _to_subnetwork(model, config, masks, MaskStrategy.MAGNITUDE.value,
                                prune_fraction=mask_config.prune_fraction)

    metrics = {"kept": subnetwork.kept(), "total": subnetwork.total(),
               "sparsity": 1.0 - subnetwork.kept() / subnetwork.total()}
    if data is not None:
        data = select_task(data, config)
        if len(data):
            metrics = _summary_metrics(model, subnetwork, data)

    logger.info(f"Magnitude baseline (fraction {mask_config.prune_fraction}) keeps "
                f"{metrics['kept']}/{metrics['total']} entries")
    return DiscoveryResult(subnetwork=subnetwork, metrics=metrics)


def lambda_sweep(model: Model, data: TaskDataset, config: DiscoveryConfig,
                 lambdas: Sequence[float] = (0.0, 0.1, 1.0, 10.0)) -> SweepResult:
    """Run discovery per L0 coefficient with a fixed seed and rank-correlate the kept counts."""
    results = []
    for l0_lambda in lambdas:
        sweep_config = config.model_copy(update={"l0_lambda": l0_lambda,
                                                 "mask": config.mask.model_copy(update={"l0_lambda": l0_lambda})})
        run = probe_discover if config.probe_mode else discover
        results.append(run(model, data, sweep_config))

    kept = [result.subnetwork.kept() for result in results]
    rho = float(spearmanr(list(lambdas), kept).correlation) if len(set(kept)) > 1 else 0.0
    logger.info(f"L0 sweep {list(lambdas)} -> kept {kept} (spearman {rho:.3f})")
    return SweepResult(lambdas=list(lambdas), kept=kept, spearman=rho, results=results)
