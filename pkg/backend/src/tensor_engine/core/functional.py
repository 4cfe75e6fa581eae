"""
Differentiable primitives.

Element-wise binary operations accept same-shape operands or a 0-d scalar on
either side; any other widening goes through an explicit broadcast_to.
"""

from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit, log_softmax
from scipy.special import softmax as _softmax

from shared.errors import BroadcastError, DimensionError, DomainError, TokenRangeError
from .tensor import Tensor, TensorLike, as_tensor

Axis = Optional[Union[int, Tuple[int, ...]]]

_GELU_SCALE = np.sqrt(2.0 / np.pi)
_GELU_CUBIC = 0.044715


def _reduce_to(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a gradient down to `shape` (inverse of broadcasting)."""
    if grad.shape == shape:
        return grad
    if shape == ():
        return np.asarray(grad.sum())
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    squeezed = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if squeezed:
        grad = grad.sum(axis=squeezed, keepdims=True)
    return grad


def _binary_operands(op: str, a: TensorLike, b: TensorLike) -> Tuple[Tensor, Tensor]:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape and a.ndim != 0 and b.ndim != 0:
        raise BroadcastError(
            f"{op}: shapes {a.shape} and {b.shape} are neither equal nor scalar; "
            f"use broadcast_to for explicit expansion"
        )
    return a, b


# Binary arithmetic

def add(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = _binary_operands("add", a, b)

    def vjp(g: np.ndarray):
        return _reduce_to(g, a.shape), _reduce_to(g, b.shape)

    return Tensor.from_op(a.data + b.data, (a, b), vjp, "add")


def sub(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = _binary_operands("sub", a, b)

    def vjp(g: np.ndarray):
        return _reduce_to(g, a.shape), _reduce_to(-g, b.shape)

    return Tensor.from_op(a.data - b.data, (a, b), vjp, "sub")


def mul(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = _binary_operands("mul", a, b)

    def vjp(g: np.ndarray):
        return _reduce_to(g * b.data, a.shape), _reduce_to(g * a.data, b.shape)

    return Tensor.from_op(a.data * b.data, (a, b), vjp, "mul")


def div(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = _binary_operands("div", a, b)

    def vjp(g: np.ndarray):
        return (_reduce_to(g / b.data, a.shape),
                _reduce_to(-g * a.data / (b.data * b.data), b.shape))

    return Tensor.from_op(a.data / b.data, (a, b), vjp, "div")


def neg(x: TensorLike) -> Tensor:
    x = as_tensor(x)
    return Tensor.from_op(-x.data, (x,), lambda g: (-g,), "neg")


def power(x: TensorLike, exponent: float) -> Tensor:
    x = as_tensor(x)
    exponent = float(exponent)

    def vjp(g: np.ndarray):
        return (g * exponent * np.power(x.data, exponent - 1.0),)

    return Tensor.from_op(np.power(x.data, exponent), (x,), vjp, "pow")


def matmul(a: TensorLike, b: TensorLike) -> Tensor:
    """Matrix product; batched left operands may share a 2-D right operand."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise DimensionError("matmul", a.shape, b.shape, "operands must be at least 2-D")
    if a.shape[-1] != b.shape[-2]:
        raise DimensionError("matmul", a.shape, b.shape, "inner dimensions differ")
    if b.ndim > 2 and a.shape[:-2] != b.shape[:-2]:
        raise DimensionError("matmul", a.shape, b.shape, "batch dimensions differ")

    def vjp(g: np.ndarray):
        grad_a = np.matmul(g, np.swapaxes(b.data, -1, -2))
        grad_b = np.matmul(np.swapaxes(a.data, -1, -2), g)
        return grad_a, _reduce_to(grad_b, b.shape)

    return Tensor.from_op(np.matmul(a.data, b.data), (a, b), vjp, "matmul")


def linear(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """x·Wᵀ + b over any leading batch dimensions; W is [out × in]."""
    x, weight = as_tensor(x), as_tensor(weight)
    if weight.ndim != 2 or x.shape[-1] != weight.shape[1]:
        raise DimensionError("linear", x.shape, weight.shape, "input width must match weight columns")
    if bias is not None and bias.shape != (weight.shape[0],):
        raise DimensionError("linear", weight.shape, bias.shape, "bias must match weight rows")

    out = np.matmul(x.data, weight.data.T)
    if bias is not None:
        out = out + bias.data
    n_in, n_out = weight.shape[1], weight.shape[0]

    def vjp(g: np.ndarray):
        grad_x = np.matmul(g, weight.data)
        flat_g = g.reshape(-1, n_out)
        grad_w = flat_g.T @ x.data.reshape(-1, n_in)
        grad_b = flat_g.sum(axis=0) if bias is not None else None
        return (grad_x, grad_w, grad_b) if bias is not None else (grad_x, grad_w)

    parents = (x, weight, bias) if bias is not None else (x, weight)
    return Tensor.from_op(out, parents, vjp, "linear")


# Element-wise unary functions

def sigmoid(x: TensorLike) -> Tensor:
    x = as_tensor(x)
    out = expit(x.data)
    return Tensor.from_op(out, (x,), lambda g: (g * out * (1.0 - out),), "sigmoid")


def relu(x: TensorLike) -> Tensor:
    x = as_tensor(x)
    return Tensor.from_op(np.maximum(x.data, 0.0), (x,), lambda g: (g * (x.data > 0.0),), "relu")


def tanh(x: TensorLike) -> Tensor:
    x = as_tensor(x)
    out = np.tanh(x.data)
    return Tensor.from_op(out, (x,), lambda g: (g * (1.0 - out * out),), "tanh")


def exp(x: TensorLike) -> Tensor:
    x = as_tensor(x)
    out = np.exp(x.data)
    return Tensor.from_op(out, (x,), lambda g: (g * out,), "exp")


def log(x: TensorLike) -> Tensor:
    x = as_tensor(x)
    if np.any(x.data <= 0.0):
        raise DomainError(f"log of non-positive value (min {x.data.min()!r})")
    return Tensor.from_op(np.log(x.data), (x,), lambda g: (g / x.data,), "log")


def clamp(x: TensorLike, lo: float, hi: float) -> Tensor:
    """Clip to [lo, hi]; gradient is 1 strictly inside and exactly 0 when saturated."""
    x = as_tensor(x)
    inside = (x.data > lo) & (x.data < hi)
    return Tensor.from_op(np.clip(x.data, lo, hi), (x,), lambda g: (g * inside,), "clamp")


def gelu(x: TensorLike) -> Tensor:
    """GELU, tanh approximation."""
    x = as_tensor(x)
    inner = _GELU_SCALE * (x.data + _GELU_CUBIC * x.data ** 3)
    t = np.tanh(inner)
    out = 0.5 * x.data * (1.0 + t)

    def vjp(g: np.ndarray):
        d_inner = _GELU_SCALE * (1.0 + 3.0 * _GELU_CUBIC * x.data ** 2)
        return (g * (0.5 * (1.0 + t) + 0.5 * x.data * (1.0 - t * t) * d_inner),)

    return Tensor.from_op(out, (x,), vjp, "gelu")


_ELEMENTWISE: Dict[str, Callable[..., Tensor]] = {
    "add": add,
    "sub": sub,
    "mul": mul,
    "div": div,
    "sigmoid": sigmoid,
    "relu": relu,
    "tanh": tanh,
    "exp": exp,
    "log": log,
    "clamp": clamp,
    "gelu": gelu,
}


def elementwise(op: str, *args) -> Tensor:
    """Dispatch an element-wise primitive by name."""
    try:
        fn = _ELEMENTWISE[op]
    except KeyError:
        raise ValueError(f"Unknown element-wise op '{op}'; expected one of {sorted(_ELEMENTWISE)}")
    return fn(*args)


# Reductions and shape manipulation

def _normalize_axis(axis: Axis, ndim: int) -> Tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    axes = (axis,) if isinstance(axis, int) else tuple(axis)
    return tuple(a % ndim for a in axes)


def sum(x: TensorLike, axis: Axis = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    x = as_tensor(x)
    axes = _normalize_axis(axis, x.ndim)

    def vjp(g: np.ndarray):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g, x.shape),)

    return Tensor.from_op(x.data.sum(axis=axes, keepdims=keepdims), (x,), vjp, "sum")


def mean(x: TensorLike, axis: Axis = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    axes = _normalize_axis(axis, x.ndim)
    count = int(np.prod([x.shape[a] for a in axes])) if axes else 1
    return div(sum(x, axis=axes, keepdims=keepdims), float(count))


def reshape(x: TensorLike, shape: Sequence[int]) -> Tensor:
    x = as_tensor(x)
    try:
        out = x.data.reshape(tuple(shape))
    except ValueError:
        raise DimensionError("reshape", x.shape, tuple(shape), "element counts differ")
    return Tensor.from_op(out, (x,), lambda g: (g.reshape(x.shape),), "reshape")


def transpose(x: TensorLike, axes: Optional[Sequence[int]] = None) -> Tensor:
    x = as_tensor(x)
    perm = tuple(axes) if axes is not None else tuple(reversed(range(x.ndim)))
    inverse = tuple(np.argsort(perm))
    return Tensor.from_op(x.data.transpose(perm), (x,), lambda g: (g.transpose(inverse),), "transpose")


def broadcast_to(x: TensorLike, shape: Sequence[int]) -> Tensor:
    """Explicit expansion; the gradient sums over the expanded axes."""
    x = as_tensor(x)
    shape = tuple(shape)
    try:
        out = np.broadcast_to(x.data, shape)
    except ValueError:
        raise BroadcastError(f"broadcast_to: cannot expand {x.shape} to {shape}")
    return Tensor.from_op(out, (x,), lambda g: (_reduce_to(g, x.shape),), "broadcast_to")


def take_rows(table: Tensor, indices: np.ndarray) -> Tensor:
    """Gather rows of a 2-D table (embedding lookup)."""
    indices = np.asarray(indices)
    if not np.issubdtype(indices.dtype, np.integer):
        raise TokenRangeError(f"take_rows: indices must be integers, got {indices.dtype}")
    if indices.size and (indices.min() < 0 or indices.max() >= table.shape[0]):
        raise TokenRangeError(
            f"take_rows: index range [{indices.min()}, {indices.max()}] outside [0, {table.shape[0]})"
        )

    def vjp(g: np.ndarray):
        grad = np.zeros_like(table.data)
        np.add.at(grad, indices, g)
        return (grad,)

    return Tensor.from_op(table.data[indices], (table,), vjp, "take_rows")


def select_positions(x: Tensor, positions: np.ndarray) -> Tensor:
    """Pick one sequence position per batch row: [b, s, d] -> [b, d]."""
    positions = np.asarray(positions, dtype=np.int64)
    if x.ndim != 3 or positions.shape != (x.shape[0],):
        raise DimensionError("select_positions", x.shape, positions.shape)
    if positions.size and (positions.min() < 0 or positions.max() >= x.shape[1]):
        raise TokenRangeError(f"select_positions: positions outside [0, {x.shape[1]})")
    rows = np.arange(x.shape[0])

    def vjp(g: np.ndarray):
        grad = np.zeros_like(x.data)
        grad[rows, positions] = g
        return (grad,)

    return Tensor.from_op(x.data[rows, positions], (x,), vjp, "select_positions")


def masked_fill(x: TensorLike, mask: np.ndarray, value: float) -> Tensor:
    """Replace entries where `mask` is true by a constant; no gradient flows there."""
    x = as_tensor(x)
    mask = np.broadcast_to(np.asarray(mask, dtype=bool), x.shape)
    keep = ~mask
    return Tensor.from_op(np.where(mask, value, x.data), (x,), lambda g: (g * keep,), "masked_fill")


def softmax(x: TensorLike) -> Tensor:
    """Softmax over the last axis."""
    x = as_tensor(x)
    out = _softmax(x.data, axis=-1)

    def vjp(g: np.ndarray):
        return (out * (g - (g * out).sum(axis=-1, keepdims=True)),)

    return Tensor.from_op(out, (x,), vjp, "softmax")


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-12) -> Tensor:
    """Normalize the last axis to zero mean / unit variance, then scale and shift."""
    if gamma.shape != (x.shape[-1],) or beta.shape != (x.shape[-1],):
        raise DimensionError("layer_norm", x.shape, gamma.shape, "affine parameters must match last axis")
    centered = x.data - x.data.mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt((centered * centered).mean(axis=-1, keepdims=True) + eps)
    normalized = centered * inv_std
    width = x.shape[-1]

    def vjp(g: np.ndarray):
        flat_g = g.reshape(-1, width)
        grad_gamma = (flat_g * normalized.reshape(-1, width)).sum(axis=0)
        grad_beta = flat_g.sum(axis=0)
        g_hat = g * gamma.data
        grad_x = inv_std * (
            g_hat
            - g_hat.mean(axis=-1, keepdims=True)
            - normalized * (g_hat * normalized).mean(axis=-1, keepdims=True)
        )
        return grad_x, grad_gamma, grad_beta

    return Tensor.from_op(normalized * gamma.data + beta.data, (x, gamma, beta), vjp, "layer_norm")


def softmax_cross_entropy(logits: Tensor, targets: np.ndarray) -> Tensor:
    """Mean negative log-likelihood of integer targets under row-wise softmax."""
    logits = as_tensor(logits)
    targets = np.asarray(targets)
    if logits.ndim != 2 or targets.shape != (logits.shape[0],):
        raise DimensionError("softmax_cross_entropy", logits.shape, targets.shape)
    batch, vocab = logits.shape
    if targets.size and (targets.min() < 0 or targets.max() >= vocab):
        raise TokenRangeError(
            f"softmax_cross_entropy: target range [{targets.min()}, {targets.max()}] outside [0, {vocab})"
        )
    rows = np.arange(batch)
    log_probs = log_softmax(logits.data, axis=1)
    loss = -log_probs[rows, targets].mean()

    def vjp(g: np.ndarray):
        grad = np.exp(log_probs)
        grad[rows, targets] -= 1.0
        return (grad * (g / batch),)

    return Tensor.from_op(np.asarray(loss), (logits,), vjp, "softmax_cross_entropy")
