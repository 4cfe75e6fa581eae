"""
Feed-forward classifier over a flattened token sequence.
"""

import logging
from typing import Dict

import numpy as np

from shared.errors import TokenRangeError
from tensor_engine import Tensor
from .base import Layer, Model
from .layers import Embedding, Linear, apply_activation
from ..models.data_models import LayerId, MLPConfig

logger = logging.getLogger(__name__)


class MLPModel(Model):
    """
    Embeds each token, concatenates the sequence and classifies the answer.

    The whole sequence is the input, so the answer position carries no extra
    information; answer_* methods only validate it.
    """

    architecture = "mlp"

    def __init__(self, config: MLPConfig, layers: Dict[LayerId, Layer]):
        super().__init__(config, layers)

    @property
    def vocab_size(self) -> int:
        return self.config.vocab_size

    @property
    def hidden_width(self) -> int:
        return self.config.hidden_sizes[-1]

    def _hidden(self, tokens: np.ndarray) -> Tensor:
        tokens = self._check_tokens(tokens, self.config.seq_len)
        batch, seq = tokens.shape
        if seq != self.config.seq_len:
            raise TokenRangeError(f"MLP expects sequences of length {self.config.seq_len}, got {seq}")

        x = self.layers[LayerId("embed.tok")].forward(tokens)
        x = x.reshape(batch, seq * self.config.d_embed)
        for index in range(len(self.config.hidden_sizes)):
            x = self.layers[LayerId.block_layer(index, "mlp", "fc")].forward(x)
            x = apply_activation(self.config.activation.value, x)
        return x

    def forward(self, tokens: np.ndarray) -> Tensor:
        """Logits [batch × vocab]."""
        return self.layers[LayerId("unembed")].forward(self._hidden(tokens))

    def answer_hidden(self, tokens: np.ndarray, positions: np.ndarray) -> Tensor:
        self._check_positions(tokens, positions)
        return self._hidden(tokens)

    def answer_logits(self, tokens: np.ndarray, positions: np.ndarray) -> Tensor:
        self._check_positions(tokens, positions)
        return self.forward(tokens)

    def _check_positions(self, tokens: np.ndarray, positions: np.ndarray) -> None:
        positions = np.asarray(positions)
        if positions.shape != (np.asarray(tokens).shape[0],):
            raise ValueError(f"Expected one answer position per row, got shape {positions.shape}")


def build_mlp(config: MLPConfig, seed: int) -> MLPModel:
    """Build an MLP with seeded Gaussian weights drawn in LayerId order."""
    rng = np.random.default_rng(seed)
    std = config.init_std

    layers: Dict[LayerId, Layer] = {
        LayerId("embed.tok"): Embedding.init("embed.tok", config.vocab_size, config.d_embed, rng, std)
    }
    width = config.seq_len * config.d_embed
    for index, size in enumerate(config.hidden_sizes):
        layer_id = LayerId.block_layer(index, "mlp", "fc")
        layers[layer_id] = Linear.init(layer_id, width, size, rng, std)
        width = size
    layers[LayerId("unembed")] = Linear.init("unembed", width, config.vocab_size, rng, std)

    model = MLPModel(config, layers)
    logger.info(f"Built MLP: hidden sizes {config.hidden_sizes}, "
                f"{sum(p.size for p in model.parameters())} parameters")
    return model
