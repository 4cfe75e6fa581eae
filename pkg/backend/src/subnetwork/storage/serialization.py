"""
Subnetwork files (.subnet.json).

One JSON document per subnetwork; each mask is bit-packed LSB-first and base64
encoded alongside its shape.
"""

import base64
import binascii
import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from shared.errors import SubnetworkFormatError
from masking.config.mask_config import Granularity
from ..models.subnetwork import Subnetwork

logger = logging.getLogger(__name__)

SUBNETWORK_FORMAT = "subnet-surgery-subnetwork/1"


def encode_mask(mask: np.ndarray) -> str:
    packed = np.packbits(mask.astype(np.uint8).ravel(), bitorder="little")
    return base64.b64encode(packed.tobytes()).decode("ascii")


def decode_mask(payload: str, shape: tuple, layer_id: str) -> np.ndarray:
    field = f"layers.{layer_id}.bits"
    try:
        packed = np.frombuffer(base64.b64decode(payload.encode("ascii"), validate=True), dtype=np.uint8)
    except (binascii.Error, ValueError, AttributeError) as e:
        raise SubnetworkFormatError(field, f"not valid base64 ({e})")
    n = int(np.prod(shape)) if shape else 1
    if packed.size != (n + 7) // 8:
        raise SubnetworkFormatError(field, f"expected {(n + 7) // 8} bytes for shape {list(shape)}, got {packed.size}")
    return np.unpackbits(packed, count=n, bitorder="little").astype(bool).reshape(shape)


def to_document(s: Subnetwork) -> Dict[str, Any]:
    return {
        "format": SUBNETWORK_FORMAT,
        "fingerprint": s.fingerprint,
        "granularity": s.granularity.value,
        "n_heads": s.n_heads,
        "metadata": s.metadata,
        "layers": [
            {"id": layer_id, "shape": list(mask.shape), "bits": encode_mask(mask)}
            for layer_id, mask in s.masks.items()
        ],
    }


def from_document(document: Any) -> Subnetwork:
    if not isinstance(document, dict):
        raise SubnetworkFormatError("document", "must be a JSON object")
    if document.get("format") != SUBNETWORK_FORMAT:
        raise SubnetworkFormatError("format", f"expected '{SUBNETWORK_FORMAT}', got {document.get('format')!r}")
    fingerprint = document.get("fingerprint")
    if not isinstance(fingerprint, str) or not fingerprint:
        raise SubnetworkFormatError("fingerprint", "missing")
    try:
        granularity = Granularity(document.get("granularity"))
    except ValueError:
        raise SubnetworkFormatError("granularity", f"unknown value {document.get('granularity')!r}")
    n_heads = document.get("n_heads")
    if n_heads is not None and (not isinstance(n_heads, int) or n_heads < 1):
        raise SubnetworkFormatError("n_heads", "must be a positive integer or null")
    metadata = document.get("metadata", {})
    if not isinstance(metadata, dict):
        raise SubnetworkFormatError("metadata", "must be an object")
    layers = document.get("layers")
    if not isinstance(layers, list) or not layers:
        raise SubnetworkFormatError("layers", "must be a non-empty list")

    masks = {}
    for position, entry in enumerate(layers):
        if not isinstance(entry, dict) or not isinstance(entry.get("id"), str):
            raise SubnetworkFormatError(f"layers[{position}].id", "missing")
        layer_id = entry["id"]
        shape = entry.get("shape")
        if not isinstance(shape, list) or not all(isinstance(d, int) and d >= 0 for d in shape):
            raise SubnetworkFormatError(f"layers.{layer_id}.shape", "must be a list of non-negative integers")
        if layer_id in masks:
            raise SubnetworkFormatError(f"layers.{layer_id}", "duplicate layer id")
        masks[layer_id] = decode_mask(entry.get("bits"), tuple(shape), layer_id)

    return Subnetwork(fingerprint=fingerprint, granularity=granularity, masks=masks,
                      n_heads=n_heads, metadata=metadata)


def save_subnetwork(s: Subnetwork, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_document(s), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info(f"Saved subnetwork {path} ({s.kept()}/{s.total()} entries kept)")
    return path


def load_subnetwork(path: Union[str, Path]) -> Subnetwork:
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SubnetworkFormatError("document", f"not valid JSON ({e.msg} at line {e.lineno})")
    return from_document(document)
