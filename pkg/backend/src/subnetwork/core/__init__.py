"""Subnetwork algebra and overlap statistics."""
