"""
Model checkpoints: canonical JSON manifest plus a little-endian f64 weight blob.

A checkpoint at stem `out/base` is the pair `out/base.json` / `out/base.bin`;
the manifest records the blob's file name and sha256.
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np
from pydantic import ValidationError

from shared.errors import CheckpointError
from shared.hashing import canonical_json
from ..core.base import CHECKPOINT_FORMAT, Model
from ..core.mlp import build_mlp
from ..core.transformer import build_transformer
from ..models.data_models import MLPConfig, TransformerConfig

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_BUILDERS = {
    "transformer": (TransformerConfig, build_transformer),
    "mlp": (MLPConfig, build_mlp),
}


def checkpoint_paths(path: PathLike) -> Tuple[Path, Path]:
    """Manifest and blob paths for a checkpoint stem (a trailing .json is accepted)."""
    path = Path(path)
    stem = path.with_suffix("") if path.suffix in (".json", ".bin") else path
    return stem.with_name(stem.name + ".json"), stem.with_name(stem.name + ".bin")


def save_checkpoint(model: Model, path: PathLike) -> Path:
    """Write the manifest and weight blob; returns the manifest path."""
    manifest_path, blob_path = checkpoint_paths(path)
    manifest_path.parent.mkdir(parents=True, exist_ok=True)

    manifest = model.manifest()
    manifest["weights_file"] = blob_path.name

    blob_path.write_bytes(model.weights_blob())
    manifest_path.write_bytes(canonical_json(manifest))

    logger.info(f"Saved checkpoint {manifest_path} ({manifest['total_parameters']} parameters, "
                f"fingerprint {model.fingerprint()})")
    return manifest_path


def _read_manifest(manifest_path: Path) -> Dict[str, Any]:
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CheckpointError(f"Checkpoint manifest not found: {manifest_path}")
    except json.JSONDecodeError as e:
        raise CheckpointError(f"Checkpoint manifest {manifest_path} is not valid JSON: {e}")

    if not isinstance(manifest, dict):
        raise CheckpointError("Checkpoint manifest must be a JSON object")
    for key in ("format", "architecture", "config", "layers", "weights_sha256", "weights_file"):
        if key not in manifest:
            raise CheckpointError(f"Checkpoint manifest is missing '{key}'")
    if manifest["format"] != CHECKPOINT_FORMAT:
        raise CheckpointError(f"Unsupported checkpoint format '{manifest['format']}'")
    if manifest["architecture"] not in _BUILDERS:
        raise CheckpointError(f"Unknown architecture '{manifest['architecture']}'")
    return manifest


def read_manifest(path: PathLike) -> Dict[str, Any]:
    """Validated manifest of a checkpoint, without loading its weights."""
    manifest_path, _ = checkpoint_paths(path)
    return _read_manifest(manifest_path)


def load_checkpoint(path: PathLike) -> Model:
    """Rebuild a model from its manifest and blob; the result is frozen."""
    manifest_path, _ = checkpoint_paths(path)
    manifest = _read_manifest(manifest_path)
    blob_path = manifest_path.with_name(manifest["weights_file"])

    try:
        blob = blob_path.read_bytes()
    except FileNotFoundError:
        raise CheckpointError(f"Weight blob not found: {blob_path}")
    if hashlib.sha256(blob).hexdigest() != manifest["weights_sha256"]:
        raise CheckpointError(f"Weight blob {blob_path} does not match the manifest digest")

    config_cls, builder = _BUILDERS[manifest["architecture"]]
    try:
        config = config_cls(**manifest["config"])
    except ValidationError as e:
        raise CheckpointError(f"Invalid model config in checkpoint: {e}")

    model = builder(config, seed=0)
    weights = np.frombuffer(blob, dtype="<f8")
    expected_ids = [str(layer_id) for layer_id in model.layers]
    recorded_ids = [entry.get("id") for entry in manifest["layers"]]
    if recorded_ids != expected_ids:
        raise CheckpointError("Checkpoint layer list does not match the architecture")

    for entry, layer in zip(manifest["layers"], model.layers.values()):
        params = layer.parameters()
        for param in entry.get("params", []):
            tensor = params.get(param.get("name"))
            shape = tuple(param.get("shape", ()))
            if tensor is None or tensor.shape != shape:
                raise CheckpointError(f"Parameter {entry['id']}.{param.get('name')} has unexpected shape {shape}")
            offset = int(param["offset"])
            stop = offset + tensor.size
            if stop > weights.size:
                raise CheckpointError(f"Weight blob is truncated at {entry['id']}.{param['name']}")
            tensor.assign(weights[offset:stop].reshape(shape))

    model.freeze()
    logger.info(f"Loaded {manifest['architecture']} checkpoint {manifest_path} "
                f"(fingerprint {model.fingerprint()})")
    return model
