"""Mask configuration."""

from .mask_config import Granularity, MaskConfig, MaskStrategy

__all__ = ["Granularity", "MaskConfig", "MaskStrategy"]
