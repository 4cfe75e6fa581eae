"""Subnetwork file format."""

from .serialization import load_subnetwork, save_subnetwork

__all__ = ["load_subnetwork", "save_subnetwork"]
