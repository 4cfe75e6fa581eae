"""
Model Core
Layers, the GPT2-style transformer and the MLP whose linear sublayers can be
swapped for masked variants, plus base training and checkpoints.
"""

from .models.data_models import Activation, HeadSlice, LayerId, MLPConfig, TransformerConfig
from .config.training_config import BaseTrainingConfig
from .core.base import Model
from .core.layers import Embedding, LayerNorm, Linear
from .core.transformer import TransformerModel, attention_head_slices, build_transformer, head_slices
from .core.mlp import MLPModel, build_mlp
from .core.training import TrainingReport, train_base
from .storage.checkpoint import load_checkpoint, save_checkpoint

__version__ = "1.0.0"
__all__ = [
    "Activation", "HeadSlice", "LayerId", "MLPConfig", "TransformerConfig",
    "BaseTrainingConfig", "Model", "Embedding", "LayerNorm", "Linear",
    "TransformerModel", "attention_head_slices", "build_transformer", "head_slices",
    "MLPModel", "build_mlp", "TrainingReport", "train_base",
    "load_checkpoint", "save_checkpoint",
]
