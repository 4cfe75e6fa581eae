"""Subnetwork value type."""

from .subnetwork import Subnetwork, all_ones

__all__ = ["Subnetwork", "all_ones"]
