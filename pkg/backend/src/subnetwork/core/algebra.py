"""
Boolean combination and sparsity of subnetworks.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict

import numpy as np

from ..models.subnetwork import Subnetwork

logger = logging.getLogger(__name__)


class CombineOp(str, Enum):
    INTERSECT = "intersect"
    UNION = "union"
    DIFFERENCE = "difference"


_OPERATORS = {
    CombineOp.INTERSECT: np.logical_and,
    CombineOp.UNION: np.logical_or,
    CombineOp.DIFFERENCE: lambda a, b: np.logical_and(a, np.logical_not(b)),
}


def combine(a: Subnetwork, b: Subnetwork, op: CombineOp) -> Subnetwork:
    """Element-wise a ∧ b, a ∨ b or a ∧ ¬b; metadata records both operands."""
    op = CombineOp(op)
    a.check_compatible(b)
    operator = _OPERATORS[op]
    masks = {layer_id: operator(a.masks[layer_id], b.masks[layer_id]) for layer_id in a.masks}
    metadata = {"strategy": "combined", "op": op.value, "operands": [a.metadata, b.metadata]}
    return a.replace(masks=masks, metadata=metadata)


@dataclass
class LayerSparsity:
    kept: int
    total: int

    @property
    def kept_fraction(self) -> float:
        return self.kept / self.total if self.total else 0.0

    @property
    def sparsity(self) -> float:
        return 1.0 - self.kept_fraction


@dataclass
class SparsityReport:
    """Kept fractions per layer and over the whole subnetwork (weighted by layer size)."""
    layers: Dict[str, LayerSparsity] = field(default_factory=dict)

    @property
    def kept(self) -> int:
        return sum(layer.kept for layer in self.layers.values())

    @property
    def total(self) -> int:
        return sum(layer.total for layer in self.layers.values())

    @property
    def kept_fraction(self) -> float:
        return self.kept / self.total if self.total else 0.0

    @property
    def sparsity(self) -> float:
        return 1.0 - self.kept_fraction

    def to_dict(self) -> dict:
        return {
            "kept": self.kept,
            "total": self.total,
            "kept_fraction": self.kept_fraction,
            "sparsity": self.sparsity,
            "layers": {layer_id: {"kept": s.kept, "total": s.total, "kept_fraction": s.kept_fraction}
                       for layer_id, s in self.layers.items()},
        }


def sparsity(s: Subnetwork) -> SparsityReport:
    return SparsityReport({layer_id: LayerSparsity(s.kept(layer_id), s.total(layer_id))
                           for layer_id in s.layer_ids})
