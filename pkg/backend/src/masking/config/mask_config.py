"""
Mask strategy configuration.
"""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class MaskStrategy(str, Enum):
    HARD_CONCRETE = "hard_concrete"
    CONTINUOUS_SPARSIFICATION = "continuous_sparsification"
    MAGNITUDE = "magnitude"


class Granularity(str, Enum):
    WEIGHT = "weight"
    NEURON = "neuron"


class MaskConfig(BaseModel):
    """
    Strategy, granularity and the free constants of each mask formulation.

    Hard-concrete gates use stretch interval (hc_gamma, hc_zeta) and
    temperature hc_beta; continuous sparsification anneals sigmoid(beta * s)
    from beta = 1 to cs_beta_final.
    """
    model_config = ConfigDict(extra="forbid")

    strategy: MaskStrategy = Field(MaskStrategy.HARD_CONCRETE, description="Mask parameterization")
    granularity: Granularity = Field(Granularity.WEIGHT, description="Mask individual weights or whole output neurons")
    hc_gamma: float = Field(-0.1, description="Hard-concrete stretch lower bound")
    hc_zeta: float = Field(1.1, description="Hard-concrete stretch upper bound")
    hc_beta: float = Field(2.0 / 3.0, description="Hard-concrete temperature")
    hc_init_logalpha: float = Field(3.0, description="Initial log-alpha of every gate")
    cs_beta_final: float = Field(200.0, description="Final inverse temperature of the anneal")
    cs_init_s: float = Field(2.0, description="Initial continuous-sparsification score")
    prune_fraction: Optional[float] = Field(None, description="Fraction of entries pruned per layer (magnitude only)")
    l0_lambda: float = Field(0.1, ge=0, description="Coefficient of the normalized L0 penalty")

    @model_validator(mode="after")
    def _check_ranges(self) -> "MaskConfig":
        if not (self.hc_gamma < 0 < 1 < self.hc_zeta):
            raise ValueError(f"Require hc_gamma < 0 < 1 < hc_zeta, got ({self.hc_gamma}, {self.hc_zeta})")
        if self.hc_beta <= 0:
            raise ValueError(f"hc_beta must be positive, got {self.hc_beta}")
        if self.cs_beta_final < 1:
            raise ValueError(f"cs_beta_final must be >= 1, got {self.cs_beta_final}")
        if self.prune_fraction is not None and not 0.0 <= self.prune_fraction <= 1.0:
            raise ValueError(f"prune_fraction must lie in [0, 1], got {self.prune_fraction}")
        return self

    @property
    def is_learned(self) -> bool:
        return self.strategy != MaskStrategy.MAGNITUDE
