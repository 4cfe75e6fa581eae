"""
Discovery run configuration.
"""

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from arithmetic_tasks.models.dataset import TaskName
from masking.config.mask_config import MaskConfig, MaskStrategy


class DiscoveryConfig(BaseModel):
    """
    Mask optimization over a frozen model.

    `l0_lambda`, when given, overrides `mask.l0_lambda`; afterwards both hold
    the same value.
    """
    model_config = ConfigDict(extra="forbid")

    task: Optional[TaskName] = Field(None, description="Data slice defining the target behavior; null uses every task")
    mask: MaskConfig = Field(default_factory=MaskConfig, description="Mask strategy and granularity")
    epochs: int = Field(300, ge=1, description="Passes over the discovery data")
    batch_size: Optional[int] = Field(None, ge=1, description="Mini-batch size; null trains full batch")
    learning_rate: float = Field(0.05, gt=0, description="Adam learning rate for mask parameters")
    probe_learning_rate: float = Field(0.01, gt=0, description="Adam learning rate for the probe head")
    seed: int = Field(0, description="Seed of the discovery random streams")
    probe_mode: bool = Field(False, description="Train a fresh linear probe jointly with the masks")
    freeze_masks: bool = Field(False, description="Pin every mask to ones (plain linear probing)")
    l0_lambda: Optional[float] = Field(None, ge=0, description="Coefficient of the normalized L0 penalty")
    log_every: int = Field(50, ge=1, description="Epoch interval between progress log lines")

    @field_validator("task", mode="before")
    @classmethod
    def _all_tasks(cls, value):
        return None if value == "all" else value

    @model_validator(mode="after")
    def _sync_and_check(self) -> "DiscoveryConfig":
        if self.l0_lambda is not None and self.l0_lambda != self.mask.l0_lambda:
            self.mask = self.mask.model_copy(update={"l0_lambda": self.l0_lambda})
        self.l0_lambda = self.mask.l0_lambda

        if self.probe_mode and self.mask.strategy == MaskStrategy.MAGNITUDE:
            raise ValueError("probe_mode needs a learned mask strategy, not magnitude")
        if self.freeze_masks and not self.probe_mode:
            raise ValueError("freeze_masks leaves nothing to train unless probe_mode is set")
        return self
