"""
Data models for model architectures and layer addressing.
"""

import re
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

_LAYER_PATTERN = re.compile(r"^layer(\d+)\.(attn|mlp)\.(\w+)$")


class LayerId(str):
    """
    Hierarchical layer address, e.g. "layer0.attn.q" or "layer1.mlp.fc1".

    Subclasses str so it can key JSON documents and dicts directly.
    """

    @property
    def layer_index(self) -> Optional[int]:
        match = _LAYER_PATTERN.match(self)
        return int(match.group(1)) if match else None

    @property
    def block(self) -> Optional[str]:
        """'attn' or 'mlp' for block sublayers, None for embeddings and norms."""
        match = _LAYER_PATTERN.match(self)
        return match.group(2) if match else None

    @property
    def sublayer(self) -> str:
        return self.rsplit(".", 1)[-1]

    @classmethod
    def block_layer(cls, index: int, block: str, name: str) -> "LayerId":
        return cls(f"layer{index}.{block}.{name}")


class Activation(str, Enum):
    GELU = "gelu"
    RELU = "relu"


class TransformerConfig(BaseModel):
    """GPT2-style decoder configuration (pre-layernorm)."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_layers: int = Field(2, ge=1, description="Number of transformer blocks")
    d_model: int = Field(64, ge=1, description="Residual stream width")
    n_heads: int = Field(4, ge=1, description="Attention heads per block")
    d_mlp: int = Field(256, ge=1, description="MLP hidden width")
    vocab_size: int = Field(15, ge=1, description="Token vocabulary size")
    max_seq_len: int = Field(5, ge=1, description="Longest supported sequence")
    causal: bool = Field(True, description="Apply the causal attention mask")
    activation: Activation = Field(Activation.GELU, description="MLP non-linearity")
    init_std: float = Field(0.02, gt=0, description="Std of the Gaussian weight init")

    @model_validator(mode="after")
    def _check_heads(self) -> "TransformerConfig":
        if self.d_model % self.n_heads != 0:
            raise ValueError(f"d_model ({self.d_model}) must be divisible by n_heads ({self.n_heads})")
        return self

    @property
    def d_head(self) -> int:
        return self.d_model // self.n_heads


class MLPConfig(BaseModel):
    """Feed-forward classifier over a flattened token-embedding sequence."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    vocab_size: int = Field(15, ge=1, description="Token vocabulary size")
    seq_len: int = Field(5, ge=1, description="Fixed input length")
    d_embed: int = Field(16, ge=1, description="Token embedding width")
    hidden_sizes: List[int] = Field(default_factory=lambda: [64, 64], description="Hidden layer widths")
    activation: Activation = Field(Activation.RELU, description="Hidden non-linearity")
    init_std: float = Field(0.02, gt=0, description="Std of the Gaussian weight init")

    @field_validator("hidden_sizes")
    @classmethod
    def _check_hidden(cls, sizes: List[int]) -> List[int]:
        if not sizes or any(size < 1 for size in sizes):
            raise ValueError("hidden_sizes must be a non-empty list of positive widths")
        return sizes


@dataclass(frozen=True)
class HeadSlice:
    """
    Index ranges owned by one attention head.

    Head h owns rows [start, stop) of the q/k/v weight matrices ([out x in]
    layout, i.e. the head's output columns) and the same columns of o.
    """
    layer: int
    head: int
    start: int
    stop: int

    def axis_for(self, sublayer: str) -> int:
        """Mask axis carrying this head for a q/k/v/o weight matrix."""
        return 1 if sublayer == "o" else 0
