"""
Masking
Hard-concrete gates, continuous sparsification and magnitude pruning over
frozen linear layers, at weight or neuron granularity.
"""

from .config.mask_config import Granularity, MaskConfig, MaskStrategy
from .core.strategies import (
    AnnealState, cs_final_mask, cs_soft_mask, hc_eval_mask, hc_expected_l0,
    hc_expected_mask, hc_gate_open_probability, hc_sample_mask, magnitude_mask
)
from .core.masked_layer import MaskedLayer, MaskMode, mask_shape, masked_forward

__version__ = "1.0.0"
__all__ = [
    "Granularity", "MaskConfig", "MaskStrategy", "AnnealState",
    "cs_final_mask", "cs_soft_mask", "hc_eval_mask", "hc_expected_l0", "hc_expected_mask",
    "hc_gate_open_probability", "hc_sample_mask", "magnitude_mask",
    "MaskedLayer", "MaskMode", "mask_shape", "masked_forward",
]
