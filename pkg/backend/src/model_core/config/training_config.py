"""
Base-model training configuration.
"""

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class BaseTrainingConfig(BaseModel):
    """Hyperparameters for training all weights of a base model."""
    model_config = ConfigDict(extra="forbid")

    epochs: int = Field(2000, ge=1, description="Maximum number of passes over the training set")
    learning_rate: float = Field(1e-3, gt=0, description="Adam learning rate")
    batch_size: Optional[int] = Field(None, ge=1, description="Mini-batch size; null trains full batch")
    convergence_loss: float = Field(1e-3, ge=0, description="Stop once the epoch train loss falls to this value")
    log_every: int = Field(100, ge=1, description="Epoch interval between progress log lines")
