"""
Deterministic hashing helpers.
"""

import json
from typing import Any

FNV_OFFSET_BASIS_64 = 0xCBF29CE484222325
FNV_PRIME_64 = 0x100000001B3
_MASK_64 = 0xFFFFFFFFFFFFFFFF


def fnv1a_64(payload: bytes) -> int:
    """64-bit FNV-1a hash of a byte string."""
    value = FNV_OFFSET_BASIS_64
    for byte in payload:
        value ^= byte
        value = (value * FNV_PRIME_64) & _MASK_64
    return value


def canonical_json(document: Any) -> bytes:
    """Serialize a JSON-compatible document with sorted keys and no whitespace."""
    return json.dumps(document, sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode("utf-8")


def fingerprint_of(document: Any) -> str:
    """Fingerprint a JSON-compatible document as 16 hex digits."""
    return f"{fnv1a_64(canonical_json(document)):016x}"
