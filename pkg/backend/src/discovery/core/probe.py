"""
Linear probe read from the answer-position representation.
"""

from pathlib import Path
from typing import Dict, List, Union

import numpy as np

from shared.errors import ConfigurationError
from tensor_engine import Tensor
from model_core.core.layers import Linear

PROBE_LAYER_ID = "probe"
PROBE_INIT_STD = 0.02


class ProbeHead:
    """Freshly initialized [width -> vocab] linear map, trained with the masks."""

    def __init__(self, linear: Linear):
        self.linear = linear

    @classmethod
    def init(cls, width: int, vocab_size: int, rng: np.random.Generator) -> "ProbeHead":
        linear = Linear.init(PROBE_LAYER_ID, width, vocab_size, rng, PROBE_INIT_STD)
        for tensor in linear.parameters().values():
            tensor.requires_grad = True
        return cls(linear)

    def forward(self, hidden: Tensor) -> Tensor:
        return self.linear.forward(hidden)

    def parameters(self) -> List[Tensor]:
        return list(self.linear.parameters().values())

    def weight_snapshot(self) -> Dict[str, np.ndarray]:
        return {tensor.name: tensor.data for tensor in self.parameters()}

    def save(self, path: Union[str, Path]) -> Path:
        """Write the head's weights as an .npz archive keyed by parameter name."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("wb") as handle:
            np.savez(handle, **self.weight_snapshot())
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ProbeHead":
        try:
            with np.load(path) as archive:
                weight = archive[f"{PROBE_LAYER_ID}.weight"]
                bias = archive[f"{PROBE_LAYER_ID}.bias"]
        except FileNotFoundError:
            raise ConfigurationError(f"Probe head not found: {path}")
        except (KeyError, ValueError, OSError) as e:
            raise ConfigurationError(f"Probe head {path} is unreadable: {e}")
        return cls(Linear(PROBE_LAYER_ID,
                          Tensor(weight, name=f"{PROBE_LAYER_ID}.weight"),
                          Tensor(bias, name=f"{PROBE_LAYER_ID}.bias")))
