"""
Tensor value type.

A Tensor wraps a read-only float64 array. Operations producing a Tensor record
their parents and a vector-Jacobian closure when any input requires grad; the
graph is rebuilt on every forward pass.
"""

from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from shared.errors import DimensionError

VJP = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]
ArrayLike = Union[np.ndarray, float, int, Sequence[float]]


def _frozen_array(data: ArrayLike, copy: bool) -> np.ndarray:
    array = np.array(data, dtype=np.float64) if copy else np.asarray(data, dtype=np.float64)
    array.flags.writeable = False
    return array


class Tensor:
    """Dense float64 array with optional gradient tape participation."""

    __slots__ = ("data", "requires_grad", "grad", "name", "_parents", "_vjp", "_op")

    # ndarray <op> Tensor defers to Tensor's reflected operators
    __array_priority__ = 1000

    def __init__(self, data: ArrayLike, requires_grad: bool = False, name: str = ""):
        self.data = _frozen_array(data, copy=True)
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._parents: Tuple["Tensor", ...] = ()
        self._vjp: Optional[VJP] = None
        self._op = "leaf"

    @classmethod
    def from_op(cls, data: ArrayLike, parents: Sequence["Tensor"], vjp: VJP, op: str) -> "Tensor":
        """Create an operation output; records the tape edge only if a parent needs grad."""
        out = cls.__new__(cls)
        out.data = _frozen_array(data, copy=False)
        out.grad = None
        out.name = ""
        out._op = op
        out.requires_grad = any(p.requires_grad for p in parents)
        if out.requires_grad:
            out._parents = tuple(parents)
            out._vjp = vjp
        else:
            out._parents = ()
            out._vjp = None
        return out

    # Introspection

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def op(self) -> str:
        return self._op

    @property
    def parents(self) -> Tuple["Tensor", ...]:
        return self._parents

    @property
    def vjp(self) -> Optional[VJP]:
        return self._vjp

    def item(self) -> float:
        if self.data.size != 1:
            raise DimensionError("item", self.data.shape, ())
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False, name=self.name)

    def assign(self, value: ArrayLike) -> None:
        """Rebind the data buffer (optimizer updates); shape must not change."""
        array = _frozen_array(value, copy=True)
        if array.shape != self.data.shape:
            raise DimensionError("assign", self.data.shape, array.shape)
        self.data = array

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        backward(self)

    def __repr__(self) -> str:
        label = f"{self.name}, " if self.name else ""
        return f"Tensor({label}shape={self.shape}, requires_grad={self.requires_grad}, op={self._op})"

    # Arithmetic

    def __add__(self, other: "TensorLike") -> "Tensor":
        return F.add(self, other)

    def __radd__(self, other: "TensorLike") -> "Tensor":
        return F.add(other, self)

    def __sub__(self, other: "TensorLike") -> "Tensor":
        return F.sub(self, other)

    def __rsub__(self, other: "TensorLike") -> "Tensor":
        return F.sub(other, self)

    def __mul__(self, other: "TensorLike") -> "Tensor":
        return F.mul(self, other)

    def __rmul__(self, other: "TensorLike") -> "Tensor":
        return F.mul(other, self)

    def __truediv__(self, other: "TensorLike") -> "Tensor":
        return F.div(self, other)

    def __rtruediv__(self, other: "TensorLike") -> "Tensor":
        return F.div(other, self)

    def __neg__(self) -> "Tensor":
        return F.neg(self)

    def __pow__(self, exponent: float) -> "Tensor":
        return F.power(self, exponent)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return F.matmul(self, other)

    # Shape and reductions

    @property
    def T(self) -> "Tensor":
        return F.transpose(self)

    def reshape(self, *shape: int) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return F.reshape(self, shape)

    def transpose(self, *axes: int) -> "Tensor":
        return F.transpose(self, axes or None)

    def sum(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        return F.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        return F.mean(self, axis=axis, keepdims=keepdims)

    # Element-wise functions

    def sigmoid(self) -> "Tensor":
        return F.sigmoid(self)

    def relu(self) -> "Tensor":
        return F.relu(self)

    def tanh(self) -> "Tensor":
        return F.tanh(self)

    def exp(self) -> "Tensor":
        return F.exp(self)

    def log(self) -> "Tensor":
        return F.log(self)

    def clamp(self, lo: float, hi: float) -> "Tensor":
        return F.clamp(self, lo, hi)


TensorLike = Union[Tensor, float, int, np.ndarray]


def as_tensor(value: TensorLike) -> Tensor:
    """Wrap constants as non-differentiable tensors."""
    return value if isinstance(value, Tensor) else Tensor(value)


from . import functional as F  # noqa: E402
from .tape import backward  # noqa: E402
