"""
Tensor Engine
Dense float64 tensors with define-by-run reverse-mode differentiation,
sized for training tiny transformers and their mask parameters.
"""

from .core.tensor import Tensor, as_tensor
from .core.tape import Tape, TapeEntry, backward
from .core import functional
from .optim.adam import Adam, AdamState, adam_step

__version__ = "1.0.0"
__all__ = ["Tensor", "as_tensor", "Tape", "TapeEntry", "backward", "functional",
           "Adam", "AdamState", "adam_step"]
