"""
Core tensor and tape implementation.
"""

from .tensor import Tensor, as_tensor
from .tape import Tape, TapeEntry, backward

__all__ = ["Tensor", "as_tensor", "Tape", "TapeEntry", "backward"]
