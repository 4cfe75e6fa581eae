"""
Layer implementations shared by both architectures.

Every layer owns its parameters as named Tensors ("<layer id>.<param>") and
exposes forward(); block linears are the swap points for masked variants.
"""

from typing import Dict, Optional

import numpy as np

from tensor_engine import Tensor
from tensor_engine.core import functional as F
from ..models.data_models import LayerId


class Linear:
    """Affine map y = x·Wᵀ + b with W stored as [out × in]."""

    maskable = True

    def __init__(self, layer_id: LayerId, weight: Tensor, bias: Optional[Tensor] = None):
        self.layer_id = LayerId(layer_id)
        self.weight = weight
        self.bias = bias

    @classmethod
    def init(cls, layer_id: str, n_in: int, n_out: int, rng: np.random.Generator,
             std: float, bias: bool = True) -> "Linear":
        weight = Tensor(rng.normal(0.0, std, size=(n_out, n_in)), name=f"{layer_id}.weight")
        bias_tensor = Tensor(np.zeros(n_out), name=f"{layer_id}.bias") if bias else None
        return cls(LayerId(layer_id), weight, bias_tensor)

    @property
    def in_features(self) -> int:
        return self.weight.shape[1]

    @property
    def out_features(self) -> int:
        return self.weight.shape[0]

    def forward(self, x: Tensor) -> Tensor:
        return F.linear(x, self.weight, self.bias)

    def parameters(self) -> Dict[str, Tensor]:
        params = {"weight": self.weight}
        if self.bias is not None:
            params["bias"] = self.bias
        return params


class Embedding:
    """Lookup table [num_embeddings × dim]."""

    maskable = False

    def __init__(self, layer_id: LayerId, weight: Tensor):
        self.layer_id = LayerId(layer_id)
        self.weight = weight

    @classmethod
    def init(cls, layer_id: str, num: int, dim: int, rng: np.random.Generator, std: float) -> "Embedding":
        return cls(LayerId(layer_id), Tensor(rng.normal(0.0, std, size=(num, dim)), name=f"{layer_id}.weight"))

    def forward(self, indices: np.ndarray) -> Tensor:
        return F.take_rows(self.weight, indices)

    def parameters(self) -> Dict[str, Tensor]:
        return {"weight": self.weight}


class LayerNorm:
    """Last-axis normalization with learned scale and shift."""

    maskable = False

    def __init__(self, layer_id: LayerId, gamma: Tensor, beta: Tensor, eps: float = 1e-12):
        self.layer_id = LayerId(layer_id)
        self.gamma = gamma
        self.beta = beta
        self.eps = eps

    @classmethod
    def init(cls, layer_id: str, dim: int) -> "LayerNorm":
        return cls(LayerId(layer_id),
                   Tensor(np.ones(dim), name=f"{layer_id}.gamma"),
                   Tensor(np.zeros(dim), name=f"{layer_id}.beta"))

    def forward(self, x: Tensor) -> Tensor:
        return F.layer_norm(x, self.gamma, self.beta, self.eps)

    def parameters(self) -> Dict[str, Tensor]:
        return {"gamma": self.gamma, "beta": self.beta}


def apply_activation(name: str, x: Tensor) -> Tensor:
    if name == "gelu":
        return F.gelu(x)
    if name == "relu":
        return F.relu(x)
    raise ValueError(f"Unsupported activation '{name}'")
