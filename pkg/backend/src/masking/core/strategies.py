"""
Mask strategies: hard-concrete gates, continuous sparsification and the
magnitude-pruning baseline.

Soft masks are Tensors on the tape so gradients reach the mask parameters;
binary masks are returned as constant Tensors of 0.0 / 1.0.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit

from tensor_engine import Tensor
from tensor_engine.core import functional as F
from ..config.mask_config import Granularity, MaskConfig

logger = logging.getLogger(__name__)

# Uniform draws are kept inside (UNIFORM_EPS, 1 - UNIFORM_EPS)
UNIFORM_EPS = 1e-12


@dataclass
class AnnealState:
    """Exponential inverse-temperature schedule beta_t = beta_final ** (t / T)."""
    beta_final: float
    total_steps: int
    step: int = 0

    def __post_init__(self):
        if self.total_steps < 1:
            raise ValueError(f"total_steps must be >= 1, got {self.total_steps}")

    @property
    def current_beta(self) -> float:
        progress = min(self.step, self.total_steps) / self.total_steps
        return float(self.beta_final ** progress)

    @property
    def finished(self) -> bool:
        return self.step >= self.total_steps

    def advance(self) -> float:
        self.step = min(self.step + 1, self.total_steps)
        return self.current_beta


# Hard concrete

def hc_sample_mask(mask_params: Tensor, config: MaskConfig,
                   rng: Optional[np.random.Generator] = None,
                   uniform: Optional[np.ndarray] = None) -> Tensor:
    """
    Reparameterized hard-concrete sample z in [0, 1].

    The noise u is drawn from `rng` unless an explicit `uniform` array is given.
    """
    if uniform is None:
        if rng is None:
            raise ValueError("hc_sample_mask needs a generator or an explicit uniform draw")
        uniform = rng.uniform(size=mask_params.shape)
    u = np.clip(np.asarray(uniform, dtype=np.float64), UNIFORM_EPS, 1.0 - UNIFORM_EPS)
    if u.shape != mask_params.shape:
        u = np.broadcast_to(u, mask_params.shape)
    noise = np.log(u) - np.log1p(-u)

    s = F.sigmoid((mask_params + noise) * (1.0 / config.hc_beta))
    stretched = s * (config.hc_zeta - config.hc_gamma) + config.hc_gamma
    return F.clamp(stretched, 0.0, 1.0)


def hc_gate_open_probability(mask_params: Tensor, config: MaskConfig) -> Tensor:
    """Per-entry P(z > 0) = sigmoid(log_alpha - beta * log(-gamma / zeta))."""
    shift = config.hc_beta * math.log(-config.hc_gamma / config.hc_zeta)
    return F.sigmoid(mask_params - shift)


def hc_expected_l0(mask_params: Tensor, config: MaskConfig) -> Tensor:
    """Closed-form expected number of open gates (differentiable in log_alpha)."""
    return hc_gate_open_probability(mask_params, config).sum()


def hc_expected_mask(mask_params: Tensor, config: MaskConfig) -> np.ndarray:
    """Deterministic gate value before binarization."""
    stretched = expit(mask_params.data) * (config.hc_zeta - config.hc_gamma) + config.hc_gamma
    return np.clip(stretched, 0.0, 1.0)


def hc_eval_mask(mask_params: Tensor, config: MaskConfig) -> Tensor:
    """Binary gate; ties at 0.5 keep the entry."""
    return Tensor((hc_expected_mask(mask_params, config) >= 0.5).astype(np.float64))


# Continuous sparsification

def cs_soft_mask(mask_params: Tensor, anneal: AnnealState) -> Tensor:
    return F.sigmoid(mask_params * anneal.current_beta)


def cs_final_mask(mask_params: Tensor) -> Tensor:
    """Binary mask s > 0; s == 0 is pruned."""
    return Tensor((mask_params.data > 0.0).astype(np.float64))


# Magnitude baseline

def magnitude_scores(base_weights: Tensor, granularity: Granularity) -> np.ndarray:
    weights = np.asarray(base_weights.data)
    if Granularity(granularity) == Granularity.NEURON and weights.ndim == 2:
        return np.linalg.norm(weights, axis=1)
    return np.abs(weights)


def magnitude_mask(base_weights: Tensor, prune_fraction: float, granularity: Granularity) -> Tensor:
    """
    Zero exactly floor(prune_fraction * n) lowest-scoring entries of one layer.

    Scores are |w| for weight granularity and row L2 norms for neuron
    granularity; equal scores prune the lowest flat index first.
    """
    if not 0.0 <= prune_fraction <= 1.0:
        raise ValueError(f"prune_fraction must lie in [0, 1], got {prune_fraction}")
    scores = magnitude_scores(base_weights, granularity)
    n_pruned = math.floor(prune_fraction * scores.size)

    mask = np.ones(scores.size)
    order = np.argsort(scores.ravel(), kind="stable")
    mask[order[:n_pruned]] = 0.0
    return Tensor(mask.reshape(scores.shape))
