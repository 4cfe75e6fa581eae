"""Training configuration."""

from .training_config import BaseTrainingConfig

__all__ = ["BaseTrainingConfig"]
