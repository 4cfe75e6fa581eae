"""
Masked linear layer: frozen base weights plus mask parameters.
"""

import logging
from enum import Enum
from typing import Dict, List, Optional

import numpy as np

from shared.errors import DimensionError, MaskStateError
from tensor_engine import Tensor
from tensor_engine.core import functional as F
from model_core.core.layers import Linear
from model_core.models.data_models import LayerId
from ..config.mask_config import Granularity, MaskConfig, MaskStrategy
from .strategies import (
    AnnealState, cs_final_mask, cs_soft_mask, hc_eval_mask, hc_expected_l0,
    hc_expected_mask, hc_sample_mask, magnitude_mask
)

logger = logging.getLogger(__name__)


class MaskMode(str, Enum):
    TRAIN = "train"
    EVAL = "eval"


def mask_shape(weight: Tensor, granularity: Granularity) -> tuple:
    return tuple(weight.shape) if Granularity(granularity) == Granularity.WEIGHT else (weight.shape[0],)


class MaskedLayer:
    """
    Drop-in replacement for a Linear whose weight (and, per neuron, bias) is
    multiplied by a mask.

    A layer either learns its mask (hard concrete, continuous sparsification)
    or carries a fixed binary one (magnitude baseline, evaluation of a stored
    subnetwork, pinned all-ones masks). Only the mask parameters are trainable.
    """

    maskable = True

    def __init__(
        self,
        base: Linear,
        config: MaskConfig,
        fixed_mask: Optional[np.ndarray] = None,
        mode: MaskMode = MaskMode.TRAIN
    ):
        self.layer_id = LayerId(base.layer_id)
        self.base_weight = base.weight
        self.base_bias = base.bias
        self.config = config
        self.granularity = Granularity(config.granularity)
        self.mode = MaskMode(mode)
        self.rng: Optional[np.random.Generator] = None
        self.anneal: Optional[AnnealState] = None

        shape = mask_shape(base.weight, self.granularity)
        self.fixed_mask: Optional[np.ndarray] = None
        self.mask_params: Optional[Tensor] = None

        if fixed_mask is not None:
            fixed = np.asarray(fixed_mask, dtype=np.float64)
            if fixed.shape != shape:
                raise DimensionError("masked_layer", shape, fixed.shape,
                                     f"{self.granularity.value} mask for {self.layer_id}")
            self.fixed_mask = fixed
        elif config.strategy == MaskStrategy.MAGNITUDE:
            if config.prune_fraction is None:
                raise MaskStateError(f"{self.layer_id}: magnitude strategy needs prune_fraction")
            self.fixed_mask = magnitude_mask(base.weight, config.prune_fraction, self.granularity).data
        else:
            init = (config.hc_init_logalpha if config.strategy == MaskStrategy.HARD_CONCRETE
                    else config.cs_init_s)
            self.mask_params = Tensor(np.full(shape, init), requires_grad=True,
                                      name=f"{self.layer_id}.mask")

    # Mode

    @property
    def is_fixed(self) -> bool:
        return self.fixed_mask is not None

    @property
    def n_entries(self) -> int:
        return int(np.prod(mask_shape(self.base_weight, self.granularity)))

    def train(self) -> "MaskedLayer":
        self.mode = MaskMode.TRAIN
        return self

    def eval(self) -> "MaskedLayer":
        self.mode = MaskMode.EVAL
        return self

    # Masks

    def current_mask(self, anneal: Optional[AnnealState] = None,
                     rng: Optional[np.random.Generator] = None) -> Tensor:
        """Mask applied by the next forward pass in the current mode."""
        if self.is_fixed:
            return Tensor(self.fixed_mask)
        anneal = anneal or self.anneal
        rng = rng or self.rng

        if self.config.strategy == MaskStrategy.HARD_CONCRETE:
            if self.mode == MaskMode.EVAL:
                return hc_eval_mask(self.mask_params, self.config)
            if rng is None:
                raise MaskStateError(f"{self.layer_id}: hard-concrete training needs a generator")
            return hc_sample_mask(self.mask_params, self.config, rng)

        if self.mode == MaskMode.EVAL:
            return cs_final_mask(self.mask_params)
        if anneal is None:
            raise MaskStateError(f"{self.layer_id}: continuous sparsification training needs an anneal state")
        return cs_soft_mask(self.mask_params, anneal)

    def final_mask(self) -> np.ndarray:
        """Binary mask as a boolean array."""
        if self.is_fixed:
            return self.fixed_mask.astype(bool)
        if self.config.strategy == MaskStrategy.HARD_CONCRETE:
            return hc_eval_mask(self.mask_params, self.config).data.astype(bool)
        return cs_final_mask(self.mask_params).data.astype(bool)

    def expected_mask(self) -> np.ndarray:
        """Deterministic soft mask used for soft-sparsity reporting."""
        if self.is_fixed:
            return self.fixed_mask
        if self.config.strategy == MaskStrategy.HARD_CONCRETE:
            return hc_expected_mask(self.mask_params, self.config)
        beta = self.anneal.current_beta if self.anneal is not None else self.config.cs_beta_final
        return cs_soft_mask(self.mask_params, AnnealState(beta, 1, 1)).data

    def l0_penalty(self, anneal: Optional[AnnealState] = None) -> Tensor:
        """Un-normalized sum of per-entry penalties."""
        if self.is_fixed:
            return Tensor(0.0)
        if self.config.strategy == MaskStrategy.HARD_CONCRETE:
            return hc_expected_l0(self.mask_params, self.config)
        anneal = anneal or self.anneal
        if anneal is None:
            raise MaskStateError(f"{self.layer_id}: continuous sparsification penalty needs an anneal state")
        return cs_soft_mask(self.mask_params, anneal).sum()

    # Layer interface

    def forward(self, x: Tensor) -> Tensor:
        return masked_forward(self, x)

    def parameters(self) -> Dict[str, Tensor]:
        params = {"weight": self.base_weight}
        if self.base_bias is not None:
            params["bias"] = self.base_bias
        return params

    def trainable_parameters(self) -> List[Tensor]:
        return [] if self.is_fixed else [self.mask_params]


def masked_forward(layer: MaskedLayer, x: Tensor, anneal: Optional[AnnealState] = None,
                   rng: Optional[np.random.Generator] = None) -> Tensor:
    """
    y = x·(W ⊙ m)ᵀ + b, with neuron masks zeroing whole rows including the bias.

    Masked-out entries contribute exactly zero.
    """
    mask = layer.current_mask(anneal, rng)
    weight, bias = layer.base_weight, layer.base_bias

    if layer.granularity == Granularity.WEIGHT:
        if mask.shape != weight.shape:
            raise DimensionError("masked_forward", weight.shape, mask.shape, "weight mask must match weight")
        return F.linear(x, weight * mask, bias)

    if mask.shape != (weight.shape[0],):
        raise DimensionError("masked_forward", weight.shape, mask.shape, "neuron mask must match weight rows")
    row_mask = F.broadcast_to(mask.reshape(weight.shape[0], 1), weight.shape)
    masked_bias = bias * mask if bias is not None else None
    return F.linear(x, weight * row_mask, masked_bias)
