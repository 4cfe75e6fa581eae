"""
Model configuration and addressing types.
"""

from .data_models import LayerId, TransformerConfig, MLPConfig, HeadSlice, Activation

__all__ = ["LayerId", "TransformerConfig", "MLPConfig", "HeadSlice", "Activation"]
