"""
Shared plumbing for the subnetwork surgery packages.
Errors, logging setup, hashing and seeded random sub-streams.
"""

from .errors import (
    SubnetSurgeryError, DimensionError, BroadcastError, DomainError, NonScalarError,
    MissingGradientError, TokenRangeError, ConfigurationError, MaskStateError,
    ModelNotFrozenError, NonFiniteLossError, SubnetworkMismatchError,
    SubnetworkFormatError, CheckpointError
)
from .hashing import fnv1a_64, canonical_json
from .logging_setup import setup_logging
from .rng import named_seed, named_generator

__all__ = [
    "SubnetSurgeryError", "DimensionError", "BroadcastError", "DomainError",
    "NonScalarError", "MissingGradientError", "TokenRangeError", "ConfigurationError",
    "MaskStateError", "ModelNotFrozenError", "NonFiniteLossError",
    "SubnetworkMismatchError", "SubnetworkFormatError", "CheckpointError",
    "fnv1a_64", "canonical_json", "setup_logging", "named_seed", "named_generator",
]
