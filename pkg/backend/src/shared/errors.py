"""
Exception hierarchy shared by every package.

Each error also derives from the closest builtin so callers can catch either.
"""

from typing import Any, Dict, Iterable, Optional, Sequence


class SubnetSurgeryError(Exception):
    """Root of all toolkit errors."""


class DimensionError(SubnetSurgeryError, ValueError):
    """Operand shapes are incompatible."""

    def __init__(self, op: str, shape_a: Sequence[int], shape_b: Sequence[int], detail: str = ""):
        self.op = op
        self.shape_a = tuple(shape_a)
        self.shape_b = tuple(shape_b)
        message = f"{op}: incompatible shapes {self.shape_a} and {self.shape_b}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class BroadcastError(SubnetSurgeryError, ValueError):
    """Element-wise operands are neither same-shape nor scalar."""


class DomainError(SubnetSurgeryError, ValueError):
    """Input outside the mathematical domain of an operation."""


class NonScalarError(SubnetSurgeryError, ValueError):
    """backward() called on something that is not a scalar on the tape."""


class MissingGradientError(SubnetSurgeryError, RuntimeError):
    """Optimizer step requested for parameters without gradients."""

    def __init__(self, names: Iterable[str]):
        self.names = list(names)
        super().__init__(f"Missing gradients for parameters: {', '.join(self.names)}")


class TokenRangeError(SubnetSurgeryError, ValueError):
    """Token or target index out of range, or sequence too long."""


class ConfigurationError(SubnetSurgeryError, ValueError):
    """Invalid or contradictory configuration."""


class MaskStateError(SubnetSurgeryError, RuntimeError):
    """Mask strategy state does not match the layer mode."""


class ModelNotFrozenError(SubnetSurgeryError, RuntimeError):
    """Discovery requires frozen base weights."""


class NonFiniteLossError(SubnetSurgeryError, FloatingPointError):
    """Loss became NaN or infinite during training."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = dict(diagnostics or {})
        if self.diagnostics:
            details = ", ".join(f"{k}={v}" for k, v in self.diagnostics.items())
            message = f"{message} [{details}]"
        super().__init__(message)


class SubnetworkMismatchError(SubnetSurgeryError, ValueError):
    """Subnetworks (or a subnetwork and a model) are not compatible."""


class SubnetworkFormatError(SubnetSurgeryError, ValueError):
    """A serialized subnetwork is malformed."""

    def __init__(self, field: str, reason: str):
        self.field = field
        super().__init__(f"Invalid subnetwork file: field '{field}': {reason}")


class CheckpointError(SubnetSurgeryError, ValueError):
    """A model checkpoint is malformed or incomplete."""
