"""
Model base class shared by the transformer and the MLP.
"""

import copy
import hashlib
import logging
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Mapping, Protocol

import numpy as np

from shared.errors import TokenRangeError
from shared.hashing import fingerprint_of
from tensor_engine import Tensor
from ..models.data_models import LayerId

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "subnet-surgery-checkpoint/1"


class Layer(Protocol):
    layer_id: LayerId

    def forward(self, x: Any) -> Tensor: ...

    def parameters(self) -> Dict[str, Tensor]: ...


class Model(ABC):
    """
    Ordered map LayerId -> layer plus the architecture that wires them.

    Block linears can be swapped through with_layers(); the base layers, and
    therefore the base weights, are never mutated by the swap.
    """

    architecture: str = ""

    def __init__(self, config: Any, layers: Dict[LayerId, Layer]):
        self.config = config
        self.layers: Dict[LayerId, Layer] = dict(layers)
        self.frozen = False
        self._maskable_ids = [
            layer_id for layer_id, layer in self.layers.items()
            if layer_id.block is not None and getattr(layer, "maskable", False)
        ]

    # Forward interface

    @abstractmethod
    def forward(self, tokens: np.ndarray) -> Tensor:
        """Logits for the given token batch."""

    @abstractmethod
    def answer_hidden(self, tokens: np.ndarray, positions: np.ndarray) -> Tensor:
        """Final-layer representation read at each row's answer position: [batch × width]."""

    @abstractmethod
    def answer_logits(self, tokens: np.ndarray, positions: np.ndarray) -> Tensor:
        """Logits at each row's answer position: [batch × vocab]."""

    @property
    @abstractmethod
    def vocab_size(self) -> int:
        ...

    @property
    @abstractmethod
    def hidden_width(self) -> int:
        ...

    @property
    def n_heads(self) -> Any:
        return None

    def _check_tokens(self, tokens: np.ndarray, max_len: int) -> np.ndarray:
        tokens = np.asarray(tokens)
        if tokens.ndim != 2:
            raise TokenRangeError(f"tokens must be [batch × seq], got shape {tokens.shape}")
        if not np.issubdtype(tokens.dtype, np.integer):
            raise TokenRangeError(f"tokens must be integers, got {tokens.dtype}")
        if tokens.shape[1] > max_len:
            raise TokenRangeError(f"sequence length {tokens.shape[1]} exceeds maximum {max_len}")
        if tokens.size and (tokens.min() < 0 or tokens.max() >= self.vocab_size):
            raise TokenRangeError(
                f"token ids must lie in [0, {self.vocab_size}), got [{tokens.min()}, {tokens.max()}]"
            )
        return tokens.astype(np.int64)

    # Layer map

    def maskable_layer_ids(self) -> List[LayerId]:
        return list(self._maskable_ids)

    def with_layers(self, overrides: Mapping[str, Layer]) -> "Model":
        """Shallow copy whose listed sublayers are replaced."""
        unknown = [layer_id for layer_id in overrides if layer_id not in self.layers]
        if unknown:
            raise KeyError(f"Unknown layer ids: {unknown}")
        clone = copy.copy(self)
        clone.layers = dict(self.layers)
        clone.layers.update({LayerId(k): v for k, v in overrides.items()})
        return clone

    def named_parameters(self) -> Dict[str, Tensor]:
        named: Dict[str, Tensor] = {}
        for layer_id, layer in self.layers.items():
            for param_name, tensor in layer.parameters().items():
                named[f"{layer_id}.{param_name}"] = tensor
        return named

    def parameters(self) -> List[Tensor]:
        return list(self.named_parameters().values())

    def freeze(self) -> None:
        for tensor in self.parameters():
            tensor.requires_grad = False
            tensor.zero_grad()
        self.frozen = True

    def unfreeze(self) -> None:
        for tensor in self.parameters():
            tensor.requires_grad = True
        self.frozen = False

    def weight_snapshot(self) -> Dict[str, np.ndarray]:
        """References to the current (read-only) parameter buffers."""
        return {name: tensor.data for name, tensor in self.named_parameters().items()}

    def restore(self, snapshot: Mapping[str, np.ndarray]) -> None:
        for name, tensor in self.named_parameters().items():
            tensor.assign(snapshot[name])

    # Manifest and fingerprint

    def weights_blob(self) -> bytes:
        return b"".join(
            np.ascontiguousarray(tensor.data, dtype="<f8").tobytes()
            for tensor in self.parameters()
        )

    def manifest(self) -> Dict[str, Any]:
        """Architecture, config, parameter layout and weight digest."""
        layers = []
        offset = 0
        for layer_id, layer in self.layers.items():
            params = []
            for param_name, tensor in layer.parameters().items():
                params.append({"name": param_name, "shape": list(tensor.shape), "offset": offset})
                offset += tensor.size
            layers.append({"id": str(layer_id), "maskable": layer_id in self._maskable_ids,
                           "params": params})

        return {
            "format": CHECKPOINT_FORMAT,
            "architecture": self.architecture,
            "config": self.config.model_dump(mode="json"),
            "layers": layers,
            "total_parameters": offset,
            "weights_sha256": hashlib.sha256(self.weights_blob()).hexdigest(),
        }

    def fingerprint(self) -> str:
        return fingerprint_of(self.manifest())

    def mask_shape(self, layer_id: str, granularity: str) -> tuple:
        """Shape of a mask over a maskable layer at 'weight' or 'neuron' granularity."""
        weight = self.layers[LayerId(layer_id)].parameters()["weight"]
        return tuple(weight.shape) if granularity == "weight" else (weight.shape[0],)
