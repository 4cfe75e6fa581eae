"""
Evaluation of the full model, a subnetwork, or its complement.
"""

import logging
from enum import Enum
from typing import Optional

import numpy as np
from sklearn.metrics import accuracy_score

from shared.errors import ConfigurationError
from tensor_engine.core import functional as F
from model_core.core.base import Model
from masking.config.mask_config import MaskConfig
from masking.core.masked_layer import MaskedLayer, MaskMode
from subnetwork.models.subnetwork import Subnetwork
from arithmetic_tasks.models.dataset import TaskDataset
from ..models.results import EvalResult
from .probe import ProbeHead

logger = logging.getLogger(__name__)


class EvalMode(str, Enum):
    FULL = "full"
    SUBNET = "subnet"
    COMPLEMENT = "complement"


def apply_subnetwork(model: Model, subnetwork: Subnetwork, complement: bool = False) -> Model:
    """Copy of `model` whose maskable layers apply the binary masks (or 1 - mask)."""
    subnetwork.validate_against(model)
    if complement:
        subnetwork = subnetwork.complement()
    config = MaskConfig(granularity=subnetwork.granularity)
    overrides = {
        layer_id: MaskedLayer(model.layers[layer_id], config, fixed_mask=mask, mode=MaskMode.EVAL)
        for layer_id, mask in subnetwork.masks.items()
    }
    return model.with_layers(overrides)


def answer_logits(model: Model, data: TaskDataset, probe_head: Optional[ProbeHead] = None):
    if probe_head is not None:
        return probe_head.forward(model.answer_hidden(data.tokens, data.answer_positions))
    return model.answer_logits(data.tokens, data.answer_positions)


def evaluate(
    model: Model,
    subnetwork: Optional[Subnetwork],
    data: TaskDataset,
    mode: EvalMode = EvalMode.FULL,
    probe_head: Optional[ProbeHead] = None
) -> EvalResult:
    """Answer-token accuracy and cross-entropy under the chosen ablation."""
    mode = EvalMode(mode)
    if len(data) == 0:
        raise ConfigurationError("Cannot evaluate on an empty dataset")

    if mode == EvalMode.FULL:
        evaluated = model
    elif subnetwork is None:
        raise ConfigurationError(f"{mode.value} evaluation requires a subnetwork")
    else:
        evaluated = apply_subnetwork(model, subnetwork, complement=mode == EvalMode.COMPLEMENT)

    logits = answer_logits(evaluated, data, probe_head)
    loss = F.softmax_cross_entropy(logits, data.answers).item()
    predictions = np.argmax(logits.data, axis=1)
    accuracy = float(accuracy_score(data.answers, predictions))

    logger.debug(f"Evaluated {mode.value} on {len(data)} examples: accuracy {accuracy:.4f}, loss {loss:.4f}")
    return EvalResult(accuracy=accuracy, loss=loss, n_examples=len(data))
