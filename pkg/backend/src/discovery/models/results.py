"""
Discovery and evaluation results.
"""

from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd

from subnetwork.models.subnetwork import Subnetwork

CURVE_COLUMNS = ["epoch", "task_loss", "l0_value", "soft_sparsity"]


@dataclass
class EpochRecord:
    """Epoch means of the objective terms, and the soft sparsity at epoch end."""
    epoch: int
    task_loss: float
    l0_value: float
    total_loss: float
    soft_sparsity: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class EvalResult:
    accuracy: float
    loss: float
    n_examples: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class DiscoveryResult:
    subnetwork: Subnetwork
    curve: List[EpochRecord] = field(default_factory=list)
    metrics: Dict[str, Any] = field(default_factory=dict)
    probe_head: Optional[Any] = None

    def curve_frame(self) -> pd.DataFrame:
        return pd.DataFrame([record.to_dict() for record in self.curve], columns=CURVE_COLUMNS)

    def write_curve(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.curve_frame().to_csv(path, index=False, float_format="%.17g")
        return path


@dataclass
class SweepResult:
    """Final kept-entry counts per L0 coefficient and their rank correlation."""
    lambdas: List[float]
    kept: List[int]
    spearman: float
    results: List[DiscoveryResult] = field(default_factory=list, repr=False)

    @property
    def shows_pressure(self) -> bool:
        return self.spearman < 0
