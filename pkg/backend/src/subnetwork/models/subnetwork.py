"""
Subnetwork value type: binary masks over a fingerprinted model's maskable layers.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Mapping, Optional, Tuple

import numpy as np

from shared.errors import SubnetworkFormatError, SubnetworkMismatchError
from masking.config.mask_config import Granularity


def _frozen_bool(mask: Any, layer_id: str) -> np.ndarray:
    array = np.asarray(mask)
    if array.dtype != bool:
        if array.size and not np.isin(array, (0, 1)).all():
            raise SubnetworkFormatError(f"masks.{layer_id}", "entries must be 0 or 1")
        array = array.astype(bool)
    array = np.array(array, dtype=bool, copy=True)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class Subnetwork:
    """
    Named map LayerId -> boolean mask, tied to one model by its fingerprint.

    Masks are read-only; every operation returns a new Subnetwork.
    """
    fingerprint: str
    granularity: Granularity
    masks: Mapping[str, np.ndarray]
    n_heads: Optional[int] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.fingerprint:
            raise SubnetworkFormatError("fingerprint", "missing")
        object.__setattr__(self, "granularity", Granularity(self.granularity))
        object.__setattr__(self, "masks", {
            str(layer_id): _frozen_bool(mask, str(layer_id)) for layer_id, mask in self.masks.items()
        })
        object.__setattr__(self, "metadata", dict(self.metadata))

    # Introspection

    @property
    def layer_ids(self) -> List[str]:
        return list(self.masks)

    def __iter__(self) -> Iterator[Tuple[str, np.ndarray]]:
        return iter(self.masks.items())

    def kept(self, layer_id: Optional[str] = None) -> int:
        if layer_id is not None:
            return int(self.masks[layer_id].sum())
        return sum(int(mask.sum()) for mask in self.masks.values())

    def total(self, layer_id: Optional[str] = None) -> int:
        if layer_id is not None:
            return int(self.masks[layer_id].size)
        return sum(int(mask.size) for mask in self.masks.values())

    # Comparison

    def mask_equal(self, other: "Subnetwork") -> bool:
        return (self.layer_ids == other.layer_ids
                and all(np.array_equal(self.masks[k], other.masks[k]) for k in self.masks))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subnetwork):
            return NotImplemented
        return (self.fingerprint == other.fingerprint
                and self.granularity == other.granularity
                and self.n_heads == other.n_heads
                and self.metadata == other.metadata
                and self.mask_equal(other))

    __hash__ = None

    def check_compatible(self, other: "Subnetwork") -> None:
        """Raise SubnetworkMismatchError unless both masks describe the same layers of the same model."""
        if self.fingerprint != other.fingerprint:
            raise SubnetworkMismatchError(
                f"Fingerprint mismatch: {self.fingerprint} vs {other.fingerprint}"
            )
        if self.granularity != other.granularity:
            raise SubnetworkMismatchError(
                f"Granularity mismatch: {self.granularity.value} vs {other.granularity.value}"
            )
        if self.layer_ids != other.layer_ids:
            raise SubnetworkMismatchError("Subnetworks cover different layers")
        for layer_id in self.masks:
            if self.masks[layer_id].shape != other.masks[layer_id].shape:
                raise SubnetworkMismatchError(
                    f"Layer {layer_id}: shape {self.masks[layer_id].shape} vs {other.masks[layer_id].shape}"
                )

    def validate_against(self, model) -> None:
        """Raise SubnetworkMismatchError unless this subnetwork can be applied to `model`."""
        fingerprint = model.fingerprint()
        if self.fingerprint != fingerprint:
            raise SubnetworkMismatchError(
                f"Subnetwork was discovered on model {self.fingerprint}, not {fingerprint}"
            )
        expected = [str(layer_id) for layer_id in model.maskable_layer_ids()]
        if self.layer_ids != expected:
            raise SubnetworkMismatchError(
                f"Subnetwork layers {self.layer_ids} do not match the model's maskable layers {expected}"
            )
        for layer_id, mask in self.masks.items():
            shape = model.mask_shape(layer_id, self.granularity.value)
            if mask.shape != shape:
                raise SubnetworkMismatchError(f"Layer {layer_id}: mask shape {mask.shape}, model expects {shape}")

    # Derivation

    def replace(self, masks: Optional[Mapping[str, np.ndarray]] = None,
                metadata: Optional[Dict[str, Any]] = None) -> "Subnetwork":
        return Subnetwork(
            fingerprint=self.fingerprint,
            granularity=self.granularity,
            masks=self.masks if masks is None else masks,
            n_heads=self.n_heads,
            metadata=self.metadata if metadata is None else metadata,
        )

    def complement(self) -> "Subnetwork":
        return self.replace(
            masks={layer_id: ~mask for layer_id, mask in self.masks.items()},
            metadata={**self.metadata, "complement_of": self.metadata.get("task")},
        )


def all_ones(model, granularity: Granularity, metadata: Optional[Dict[str, Any]] = None) -> Subnetwork:
    """The full model as a subnetwork."""
    granularity = Granularity(granularity)
    return Subnetwork(
        fingerprint=model.fingerprint(),
        granularity=granularity,
        masks={str(layer_id): np.ones(model.mask_shape(layer_id, granularity.value), dtype=bool)
               for layer_id in model.maskable_layer_ids()},
        n_heads=model.n_heads,
        metadata=metadata or {"strategy": "full"},
    )
