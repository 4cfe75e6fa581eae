"""
GPT2-style decoder (pre-layernorm) built from swappable sublayers.

Per block: x + attn(ln1(x)), then x + mlp(ln2(x)). Attention reads its q/k/v/o
projections from the model's layer map on every call, so masked variants
installed through with_layers() take effect without rebuilding the model.
"""

import logging
import math
from typing import Dict, List

import numpy as np

from tensor_engine import Tensor
from tensor_engine.core import functional as F
from .base import Layer, Model
from .layers import Embedding, LayerNorm, Linear, apply_activation
from ..models.data_models import HeadSlice, LayerId, TransformerConfig

logger = logging.getLogger(__name__)

ATTENTION_SUBLAYERS = ("q", "k", "v", "o")
MLP_SUBLAYERS = ("fc1", "fc2")

# Additive stand-in for -inf on masked attention scores
CAUSAL_FILL = -1e9


class TransformerModel(Model):
    """Multi-head causal transformer over short token sequences."""

    architecture = "transformer"

    def __init__(self, config: TransformerConfig, layers: Dict[LayerId, Layer]):
        super().__init__(config, layers)

    @property
    def vocab_size(self) -> int:
        return self.config.vocab_size

    @property
    def hidden_width(self) -> int:
        return self.config.d_model

    @property
    def n_heads(self) -> int:
        return self.config.n_heads

    def _layer(self, name: str) -> Layer:
        return self.layers[LayerId(name)]

    def _attention(self, index: int, x: Tensor) -> Tensor:
        batch, seq, d_model = x.shape
        n_heads, d_head = self.config.n_heads, self.config.d_head

        def split_heads(t: Tensor) -> Tensor:
            return t.reshape(batch, seq, n_heads, d_head).transpose(0, 2, 1, 3)

        q = split_heads(self._layer(f"layer{index}.attn.q").forward(x))
        k = split_heads(self._layer(f"layer{index}.attn.k").forward(x))
        v = split_heads(self._layer(f"layer{index}.attn.v").forward(x))

        scores = F.matmul(q, k.transpose(0, 1, 3, 2)) * (1.0 / math.sqrt(d_head))
        if self.config.causal:
            future = np.triu(np.ones((seq, seq), dtype=bool), k=1)
            scores = F.masked_fill(scores, future, CAUSAL_FILL)
        weights = F.softmax(scores)

        merged = F.matmul(weights, v).transpose(0, 2, 1, 3).reshape(batch, seq, d_model)
        return self._layer(f"layer{index}.attn.o").forward(merged)

    def _mlp(self, index: int, x: Tensor) -> Tensor:
        hidden = self._layer(f"layer{index}.mlp.fc1").forward(x)
        hidden = apply_activation(self.config.activation.value, hidden)
        return self._layer(f"layer{index}.mlp.fc2").forward(hidden)

    def hidden_states(self, tokens: np.ndarray) -> Tensor:
        """Final-layernorm residual stream: [batch × seq × d_model]."""
        tokens = self._check_tokens(tokens, self.config.max_seq_len)
        batch, seq = tokens.shape

        x = self._layer("embed.tok").forward(tokens)
        positions = self._layer("embed.pos").forward(np.arange(seq))
        x = x + F.broadcast_to(positions, (batch, seq, self.config.d_model))

        for index in range(self.config.n_layers):
            x = x + self._attention(index, self._layer(f"layer{index}.ln1").forward(x))
            x = x + self._mlp(index, self._layer(f"layer{index}.ln2").forward(x))

        return self._layer("ln_f").forward(x)

    def forward(self, tokens: np.ndarray) -> Tensor:
        return self._layer("unembed").forward(self.hidden_states(tokens))

    def answer_hidden(self, tokens: np.ndarray, positions: np.ndarray) -> Tensor:
        return F.select_positions(self.hidden_states(tokens), positions)

    def answer_logits(self, tokens: np.ndarray, positions: np.ndarray) -> Tensor:
        return self._layer("unembed").forward(self.answer_hidden(tokens, positions))


def transformer_layer_ids(config: TransformerConfig) -> List[LayerId]:
    """All LayerIds in construction (and blob) order."""
    ids = [LayerId("embed.tok"), LayerId("embed.pos")]
    for index in range(config.n_layers):
        ids.append(LayerId(f"layer{index}.ln1"))
        ids.extend(LayerId.block_layer(index, "attn", name) for name in ATTENTION_SUBLAYERS)
        ids.append(LayerId(f"layer{index}.ln2"))
        ids.extend(LayerId.block_layer(index, "mlp", name) for name in MLP_SUBLAYERS)
    ids.extend([LayerId("ln_f"), LayerId("unembed")])
    return ids


def build_transformer(config: TransformerConfig, seed: int) -> TransformerModel:
    """
    Build a transformer with seeded Gaussian weights.

    Weights are drawn in LayerId order from a single generator, so the same
    (config, seed) always yields bit-identical parameters.
    """
    rng = np.random.default_rng(seed)
    std = config.init_std
    d_model, d_mlp = config.d_model, config.d_mlp

    layers: Dict[LayerId, Layer] = {}
    for layer_id in transformer_layer_ids(config):
        if layer_id == "embed.tok":
            layers[layer_id] = Embedding.init(layer_id, config.vocab_size, d_model, rng, std)
        elif layer_id == "embed.pos":
            layers[layer_id] = Embedding.init(layer_id, config.max_seq_len, d_model, rng, std)
        elif layer_id == "unembed":
            layers[layer_id] = Linear.init(layer_id, d_model, config.vocab_size, rng, std, bias=False)
        elif layer_id.sublayer in ATTENTION_SUBLAYERS and layer_id.block == "attn":
            layers[layer_id] = Linear.init(layer_id, d_model, d_model, rng, std)
        elif layer_id.sublayer == "fc1":
            layers[layer_id] = Linear.init(layer_id, d_model, d_mlp, rng, std)
        elif layer_id.sublayer == "fc2":
            layers[layer_id] = Linear.init(layer_id, d_mlp, d_model, rng, std)
        else:
            layers[layer_id] = LayerNorm.init(layer_id, d_model)

    model = TransformerModel(config, layers)
    logger.info(
        f"Built transformer: {config.n_layers} layers, d_model={d_model}, "
        f"{config.n_heads} heads, {sum(p.size for p in model.parameters())} parameters"
    )
    return model


def head_slices(d_model: int, n_heads: int, layer: int) -> List[HeadSlice]:
    """Partition [0, d_model) into n_heads contiguous ranges of width d_model // n_heads."""
    d_head = d_model // n_heads
    return [HeadSlice(layer, head, head * d_head, (head + 1) * d_head) for head in range(n_heads)]


def attention_head_slices(model: Model, layer: int) -> List[HeadSlice]:
    """Per-head index ranges of q/k/v output rows and o input columns for one block."""
    if not isinstance(model, TransformerModel):
        raise IndexError(f"{model.architecture} model has no attention layers")
    if not 0 <= layer < model.config.n_layers:
        raise IndexError(f"Layer {layer} out of range [0, {model.config.n_layers})")
    return head_slices(model.config.d_model, model.config.n_heads, layer)
