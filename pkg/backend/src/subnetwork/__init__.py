"""
Subnetwork
Binary mask bundles over a model's maskable layers: overlap statistics,
boolean combination, sparsity and the .subnet.json file format.
"""

from .models.subnetwork import Subnetwork, all_ones
from .core.algebra import CombineOp, LayerSparsity, SparsityReport, combine, sparsity
from .core.overlap import OverlapReport, OverlapRow, head_group_entries, overlap
from .storage.serialization import load_subnetwork, save_subnetwork

__version__ = "1.0.0"
__all__ = [
    "Subnetwork", "all_ones", "CombineOp", "LayerSparsity", "SparsityReport",
    "combine", "sparsity", "OverlapReport", "OverlapRow", "head_group_entries",
    "overlap", "load_subnetwork", "save_subnetwork",
]
