"""
Adam optimizer with bias-corrected moment estimates.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from shared.errors import ConfigurationError, MissingGradientError
from ..core.tensor import Tensor

logger = logging.getLogger(__name__)

DEFAULT_LR = 1e-3
DEFAULT_BETA1 = 0.9
DEFAULT_BETA2 = 0.999
DEFAULT_EPS = 1e-8


@dataclass
class AdamState:
    """First/second moment estimates keyed by parameter name, plus the step count."""
    step: int = 0
    first_moments: Dict[str, np.ndarray] = field(default_factory=dict)
    second_moments: Dict[str, np.ndarray] = field(default_factory=dict)


def _parameter_keys(params: Sequence[Tensor]) -> List[str]:
    keys = [p.name or f"param[{i}]" for i, p in enumerate(params)]
    if len(set(keys)) != len(keys):
        raise ConfigurationError("Optimizer parameters must have unique names")
    return keys


def adam_step(
    params: Sequence[Tensor],
    state: AdamState,
    lr: float = DEFAULT_LR,
    beta1: float = DEFAULT_BETA1,
    beta2: float = DEFAULT_BETA2,
    eps: float = DEFAULT_EPS
) -> None:
    """Apply one Adam update in place and advance `state`."""
    keys = _parameter_keys(params)
    missing = [key for key, p in zip(keys, params) if p.grad is None]
    if missing:
        raise MissingGradientError(missing)

    state.step += 1
    correction1 = 1.0 - beta1 ** state.step
    correction2 = 1.0 - beta2 ** state.step

    for key, param in zip(keys, params):
        grad = param.grad
        m = state.first_moments.get(key)
        v = state.second_moments.get(key)
        if m is None:
            m = np.zeros_like(param.data)
            v = np.zeros_like(param.data)

        m = beta1 * m + (1.0 - beta1) * grad
        v = beta2 * v + (1.0 - beta2) * grad * grad
        state.first_moments[key] = m
        state.second_moments[key] = v

        m_hat = m / correction1
        v_hat = v / correction2
        param.assign(param.data - lr * m_hat / (np.sqrt(v_hat) + eps))


class Adam:
    """Stateful wrapper around adam_step for a fixed parameter list."""

    def __init__(
        self,
        params: Sequence[Tensor],
        lr: float = DEFAULT_LR,
        beta1: float = DEFAULT_BETA1,
        beta2: float = DEFAULT_BETA2,
        eps: float = DEFAULT_EPS
    ):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.state = AdamState()
        _parameter_keys(self.params)

        logger.debug(f"Adam initialized over {len(self.params)} tensors (lr={lr})")

    def zero_grad(self) -> None:
        for param in self.params:
            param.zero_grad()

    def step(self) -> None:
        adam_step(self.params, self.state, lr=self.lr, beta1=self.beta1,
                  beta2=self.beta2, eps=self.eps)
