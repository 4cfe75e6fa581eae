"""
Gradient tape.

The tape is materialised from a loss tensor by walking the recorded graph in
topological order; replaying it in reverse accumulates the chain-rule gradient.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from shared.errors import NonScalarError
from .tensor import VJP, Tensor

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TapeEntry:
    """One primitive operation on the tape."""
    op: str
    output: Tensor
    inputs: Tuple[Tensor, ...]
    vjp: VJP


class Tape:
    """Topologically ordered record of the operations reachable from a loss."""

    def __init__(self, entries: List[TapeEntry], tensors: List[Tensor]):
        self.entries = entries
        self.tensors = tensors

    @classmethod
    def record(cls, root: Tensor) -> "Tape":
        """Collect every tensor reachable from `root`, parents before children."""
        order: List[Tensor] = []
        visited = set()
        stack: List[Tuple[Tensor, bool]] = [(root, False)]

        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node.parents:
                if id(parent) not in visited:
                    stack.append((parent, False))

        entries = [
            TapeEntry(op=node.op, output=node, inputs=node.parents, vjp=node.vjp)
            for node in order if node.vjp is not None
        ]
        return cls(entries, order)

    def replay(self, root: Tensor) -> Dict[int, np.ndarray]:
        """Propagate d(root)/d(root) = 1 backwards; returns gradients keyed by tensor id."""
        grads: Dict[int, np.ndarray] = {id(root): np.ones_like(root.data)}

        for entry in reversed(self.entries):
            upstream = grads.get(id(entry.output))
            if upstream is None:
                continue
            contributions = entry.vjp(upstream)
            for tensor, contribution in zip(entry.inputs, contributions):
                if contribution is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                if key in grads:
                    grads[key] = grads[key] + contribution
                else:
                    grads[key] = contribution

        return grads

    def __len__(self) -> int:
        return len(self.entries)


def backward(loss: Tensor) -> None:
    """Fill `.grad` of every requires_grad tensor reachable from a scalar loss."""
    if not isinstance(loss, Tensor) or loss.ndim != 0:
        shape = getattr(loss, "shape", type(loss).__name__)
        raise NonScalarError(f"backward() needs a scalar loss, got shape {shape}")
    if not loss.requires_grad:
        raise NonScalarError("backward() called on a tensor that is not on the tape")

    tape = Tape.record(loss)
    grads = tape.replay(loss)

    for tensor in tape.tensors:
        grad = grads.get(id(tensor))
        if grad is None or not tensor.requires_grad:
            continue
        grad = np.array(grad, dtype=np.float64).reshape(tensor.shape)
        tensor.grad = grad if tensor.grad is None else tensor.grad + grad

    logger.debug(f"Backward pass replayed {len(tape)} tape entries")
