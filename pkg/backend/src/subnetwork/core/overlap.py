"""
Overlap statistics between two subnetworks, per layer, per attention head and
over the whole model.
"""

import json
import logging
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from model_core.core.transformer import head_slices
from model_core.models.data_models import HeadSlice, LayerId
from masking.config.mask_config import Granularity
from ..models.subnetwork import Subnetwork

logger = logging.getLogger(__name__)

_QUERY_LAYER = re.compile(r"^layer(\d+)\.attn\.q$")

CSV_COLUMNS = ["scope", "layer", "head", "total", "kept_a", "kept_b", "intersection",
               "union", "jaccard", "sparsity_a", "sparsity_b"]


@dataclass
class OverlapRow:
    """Set statistics for one group of mask entries."""
    scope: str
    layer: str
    head: Optional[int]
    total: int
    kept_a: int
    kept_b: int
    intersection: int
    union: int

    @property
    def jaccard(self) -> float:
        return self.intersection / self.union if self.union else 0.0

    @property
    def sparsity_a(self) -> float:
        return 1.0 - self.kept_a / self.total if self.total else 0.0

    @property
    def sparsity_b(self) -> float:
        return 1.0 - self.kept_b / self.total if self.total else 0.0

    @classmethod
    def from_masks(cls, scope: str, layer: str, head: Optional[int],
                   a: np.ndarray, b: np.ndarray) -> "OverlapRow":
        return cls(
            scope=scope,
            layer=layer,
            head=head,
            total=int(a.size),
            kept_a=int(a.sum()),
            kept_b=int(b.sum()),
            intersection=int(np.logical_and(a, b).sum()),
            union=int(np.logical_or(a, b).sum()),
        )

    def to_dict(self) -> dict:
        row = asdict(self)
        row.update(jaccard=self.jaccard, sparsity_a=self.sparsity_a, sparsity_b=self.sparsity_b)
        return row


@dataclass
class OverlapReport:
    fingerprint: str
    granularity: Granularity
    rows: List[OverlapRow] = field(default_factory=list)

    @property
    def layer_rows(self) -> List[OverlapRow]:
        return [row for row in self.rows if row.scope == "layer"]

    @property
    def head_rows(self) -> List[OverlapRow]:
        return [row for row in self.rows if row.scope == "head"]

    @property
    def total(self) -> OverlapRow:
        return next(row for row in self.rows if row.scope == "total")

    def layer(self, layer_id: str) -> OverlapRow:
        return next(row for row in self.layer_rows if row.layer == layer_id)

    def block_totals(self) -> Dict[int, OverlapRow]:
        """Statistics pooled over every maskable sublayer of each block index."""
        pooled: Dict[int, OverlapRow] = {}
        for row in self.layer_rows:
            index = LayerId(row.layer).layer_index
            if index is None:
                continue
            acc = pooled.setdefault(index, OverlapRow("block", f"layer{index}", None, 0, 0, 0, 0, 0))
            acc.total += row.total
            acc.kept_a += row.kept_a
            acc.kept_b += row.kept_b
            acc.intersection += row.intersection
            acc.union += row.union
        return dict(sorted(pooled.items()))

    def to_dict(self) -> dict:
        return {
            "fingerprint": self.fingerprint,
            "granularity": self.granularity.value,
            "rows": [row.to_dict() for row in self.rows],
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.to_dict() for row in self.rows], columns=CSV_COLUMNS)

    def write_json(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = self.to_frame()
        frame["head"] = frame["head"].astype("Int64")
        frame.to_csv(path, index=False)
        return path

    def summary_table(self) -> str:
        frame = self.to_frame()
        frame = frame[frame["scope"] != "head"][["layer", "kept_a", "kept_b", "intersection",
                                                  "union", "jaccard", "sparsity_a", "sparsity_b"]]
        return frame.to_string(index=False, float_format=lambda v: f"{v:.4f}")


def attention_layer_indices(s: Subnetwork) -> List[int]:
    indices = []
    for layer_id in s.layer_ids:
        match = _QUERY_LAYER.match(layer_id)
        if match:
            indices.append(int(match.group(1)))
    return sorted(indices)


def head_group_entries(s: Subnetwork, layer_index: int) -> List[Tuple[HeadSlice, np.ndarray]]:
    """
    Mask entries owned by each head of one attention block, flattened.

    Weight granularity: q/k/v rows [start, stop) and o columns [start, stop).
    Neuron granularity: q/k/v output neurons [start, stop).
    """
    if not s.n_heads:
        return []
    prefix = f"layer{layer_index}.attn"
    d_model = s.masks[f"{prefix}.q"].shape[0]

    groups = []
    for head in head_slices(d_model, s.n_heads, layer_index):
        parts = [s.masks[f"{prefix}.{name}"][head.start:head.stop].ravel() for name in ("q", "k", "v")]
        if s.granularity == Granularity.WEIGHT and f"{prefix}.o" in s.masks:
            parts.append(s.masks[f"{prefix}.o"][:, head.start:head.stop].ravel())
        groups.append((head, np.concatenate(parts)))
    return groups


def overlap(a: Subnetwork, b: Subnetwork) -> OverlapReport:
    """Compare two subnetworks of the same model and granularity."""
    a.check_compatible(b)
    report = OverlapReport(fingerprint=a.fingerprint, granularity=a.granularity)

    for layer_id in a.layer_ids:
        report.rows.append(OverlapRow.from_masks("layer", layer_id, None, a.masks[layer_id], b.masks[layer_id]))

    for index in attention_layer_indices(a):
        for (head, entries_a), (_, entries_b) in zip(head_group_entries(a, index), head_group_entries(b, index)):
            report.rows.append(OverlapRow.from_masks("head", f"layer{index}.attn", head.head, entries_a, entries_b))

    flat_a = np.concatenate([mask.ravel() for mask in a.masks.values()])
    flat_b = np.concatenate([mask.ravel() for mask in b.masks.values()])
    report.rows.append(OverlapRow.from_masks("total", "total", None, flat_a, flat_b))

    logger.debug(f"Overlap: {len(report.layer_rows)} layers, {len(report.head_rows)} head groups, "
                 f"global jaccard {report.total.jaccard:.4f}")
    return report
