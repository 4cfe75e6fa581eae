"""Checkpoint storage."""

from .checkpoint import checkpoint_paths, load_checkpoint, read_manifest, save_checkpoint

__all__ = ["checkpoint_paths", "load_checkpoint", "read_manifest", "save_checkpoint"]
