"""Differentiable primitives used by the victim and attacker networks.

Every function takes :class:`Tensor` operands (plain numbers and arrays are
wrapped as constants) and returns a new tensor. Broadcasting is limited to
scalar-with-tensor.
"""

from collections.abc import Sequence
from typing import Any, Literal

import numpy as np
import scipy.sparse as sp

from ga2c.autodiff.tensor import Tensor
from ga2c.utils.errors import (
    EmptyDistributionError,
    EmptyGraphError,
    GraphIndexError,
    ShapeError,
)

ReadoutMode = Literal["max", "sum"]


def as_tensor(value: Any) -> Tensor:
    """Wrap a number or array as a constant tensor; tensors pass through."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def _check_broadcast(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape != b.shape and a.data.ndim != 0 and b.data.ndim != 0:
        raise ShapeError(f"{op}: incompatible shapes {a.shape} and {b.shape}")


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    return np.asarray(grad.sum()).reshape(shape)


def add(a: Any, b: Any) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "add")

    def backward(g: np.ndarray):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return Tensor.from_op(a.data + b.data, (a, b), backward, "add")


def sub(a: Any, b: Any) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "sub")

    def backward(g: np.ndarray):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return Tensor.from_op(a.data - b.data, (a, b), backward, "sub")


def mul(a: Any, b: Any) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "mul")

    def backward(g: np.ndarray):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return Tensor.from_op(a.data * b.data, (a, b), backward, "mul")


def square(x: Tensor) -> Tensor:
    def backward(g: np.ndarray):
        return (2.0 * x.data * g,)

    return Tensor.from_op(x.data * x.data, (x,), backward, "square")


def abs(x: Tensor) -> Tensor:  # noqa: A001
    """Absolute value; the subgradient at 0 is 0."""

    def backward(g: np.ndarray):
        return (np.sign(x.data) * g,)

    return Tensor.from_op(np.abs(x.data), (x,), backward, "abs")


def relu(x: Tensor) -> Tensor:
    """Rectified linear unit; the gradient at 0 is 0."""
    mask = x.data > 0

    def backward(g: np.ndarray):
        return (g * mask,)

    return Tensor.from_op(np.where(mask, x.data, 0.0), (x,), backward, "relu")


def sigmoid(x: Tensor) -> Tensor:
    # Split by sign so exp never overflows
    data = x.data
    out = np.empty_like(data)
    pos = data >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-data[pos]))
    exp_neg = np.exp(data[~pos])
    out[~pos] = exp_neg / (1.0 + exp_neg)

    def backward(g: np.ndarray):
        return (g * out * (1.0 - out),)

    return Tensor.from_op(out, (x,), backward, "sigmoid")


def log(x: Tensor) -> Tensor:
    """Natural logarithm. Inputs must be strictly positive; clamp first."""

    def backward(g: np.ndarray):
        return (g / x.data,)

    with np.errstate(divide="ignore"):
        out = np.log(x.data)
    return Tensor.from_op(out, (x,), backward, "log")


def clamp(x: Tensor, low: float, high: float) -> Tensor:
    """Clip values into [low, high]; gradient is 1 inside the interval, 0 outside."""
    inside = (x.data >= low) & (x.data <= high)

    def backward(g: np.ndarray):
        return (g * inside,)

    return Tensor.from_op(np.clip(x.data, low, high), (x,), backward, "clamp")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of a (m×k, or a k-vector) with b (k×n)."""
    a, b = as_tensor(a), as_tensor(b)
    if b.data.ndim != 2 or a.data.ndim not in (1, 2) or a.shape[-1] != b.shape[0]:
        raise ShapeError(f"matmul: cannot multiply {a.shape} by {b.shape}")

    def backward(g: np.ndarray):
        if a.data.ndim == 1:
            return g @ b.data.T, np.outer(a.data, g)
        return g @ b.data.T, a.data.T @ g

    return Tensor.from_op(a.data @ b.data, (a, b), backward, "matmul")


def spmm(s: sp.spmatrix | sp.sparray, d: Tensor) -> Tensor:
    """Sparse-constant times dense product; only ``d`` receives a gradient."""
    d = as_tensor(d)
    if d.data.ndim != 2 or s.shape[1] != d.shape[0]:
        raise ShapeError(f"spmm: cannot multiply sparse {s.shape} by {d.shape}")
    s = sp.csr_matrix(s)

    def backward(g: np.ndarray):
        return (np.asarray(s.T @ g),)

    return Tensor.from_op(np.asarray(s @ d.data), (d,), backward, "spmm")


def softmax_row(logits: Tensor) -> Tensor:
    """Softmax over the last axis; ``-inf`` entries get probability exactly 0.

    Raises:
        EmptyDistributionError: If every entry of some row is ``-inf``.
    """
    data = logits.data
    finite_max = np.max(np.where(np.isneginf(data), -np.inf, data), axis=-1, keepdims=True)
    if np.any(np.isneginf(finite_max)):
        raise EmptyDistributionError("softmax over a fully masked row")
    exp = np.exp(data - finite_max)
    out = exp / exp.sum(axis=-1, keepdims=True)

    def backward(g: np.ndarray):
        inner = np.sum(g * out, axis=-1, keepdims=True)
        return (out * (g - inner),)

    return Tensor.from_op(out, (logits,), backward, "softmax")


def _log_softmax(data: np.ndarray) -> np.ndarray:
    shifted = data - np.max(data, axis=-1, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


def loss_from_probs(probs: np.ndarray, label: int) -> float:
    """-log probs[label]; an underflowed probability counts as the smallest float."""
    return float(-np.log(max(float(probs[label]), np.finfo(np.float64).tiny)))


def log_softmax_nll(logits: Tensor, target: int | np.ndarray | Sequence[int]) -> Tensor:
    """Negative log-likelihood of ``target`` under softmax(logits).

    A C-vector with an integer target gives -log softmax(logits)[target].
    An n×C matrix with n targets gives the mean over rows.

    Raises:
        GraphIndexError: If a target is outside [0, C).
    """
    data = logits.data
    num_classes = data.shape[-1]
    targets = np.atleast_1d(np.asarray(target, dtype=np.int64))
    if np.any(targets < 0) or np.any(targets >= num_classes):
        raise GraphIndexError(f"class id out of range [0, {num_classes}): {targets.tolist()}")

    if data.ndim == 1:
        if targets.size != 1:
            raise ShapeError("log_softmax_nll: a vector of logits takes a single target")
        log_probs = _log_softmax(data)
        t = int(targets[0])

        def backward_vec(g: np.ndarray):
            grad = np.exp(log_probs)
            grad[t] -= 1.0
            return (grad * g,)

        return Tensor.from_op(np.asarray(-log_probs[t]), (logits,), backward_vec, "nll")

    if data.ndim != 2 or targets.size != data.shape[0]:
        raise ShapeError(f"log_softmax_nll: {targets.size} targets for logits {data.shape}")
    log_probs = _log_softmax(data)
    rows = np.arange(data.shape[0])
    n = data.shape[0]

    def backward_mat(g: np.ndarray):
        grad = np.exp(log_probs)
        grad[rows, targets] -= 1.0
        return (grad * (g / n),)

    loss = -log_probs[rows, targets].mean()
    return Tensor.from_op(np.asarray(loss), (logits,), backward_mat, "nll")


def readout(h: Tensor, mode: ReadoutMode = "max") -> Tensor:
    """Column-wise pooling of node embeddings into one vector.

    Max pooling routes the gradient to the first argmax row of each column.

    Raises:
        EmptyGraphError: If ``h`` has no rows.
    """
    if h.data.ndim != 2:
        raise ShapeError(f"readout expects a matrix, got shape {h.shape}")
    if h.shape[0] == 0:
        raise EmptyGraphError("readout over zero nodes")

    if mode == "sum":

        def backward_sum(g: np.ndarray):
            return (np.broadcast_to(g, h.shape).copy(),)

        return Tensor.from_op(h.data.sum(axis=0), (h,), backward_sum, "readout_sum")

    if mode != "max":
        raise ValueError(f"unknown readout mode: {mode}")
    argmax = np.argmax(h.data, axis=0)
    cols = np.arange(h.shape[1])

    def backward_max(g: np.ndarray):
        grad = np.zeros_like(h.data)
        grad[argmax, cols] = g
        return (grad,)

    return Tensor.from_op(h.data[argmax, cols], (h,), backward_max, "readout_max")


def concat(tensors: Sequence[Any], axis: int = 0) -> Tensor:
    """Concatenate tensors along an existing axis."""
    parts = [as_tensor(t) for t in tensors]
    if not parts:
        raise ShapeError("concat of zero tensors")
    try:
        out = np.concatenate([p.data for p in parts], axis=axis)
    except ValueError as e:
        raise ShapeError(f"concat: {e}") from e
    bounds = np.cumsum([p.shape[axis] for p in parts])[:-1]

    def backward(g: np.ndarray):
        return tuple(np.split(g, bounds, axis=axis))

    return Tensor.from_op(out, parts, backward, "concat")


def index(x: Tensor, idx: Any) -> Tensor:
    """Select rows (or entries) of ``x`` with numpy indexing along axis 0."""
    rows = np.asarray(idx) if not isinstance(idx, (int, np.integer)) else int(idx)
    try:
        out = x.data[rows]
    except IndexError as e:
        raise GraphIndexError(str(e)) from e

    def backward(g: np.ndarray):
        grad = np.zeros_like(x.data)
        np.add.at(grad, rows, g)
        return (grad,)

    return Tensor.from_op(out, (x,), backward, "index")


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    try:
        out = x.data.reshape(shape)
    except ValueError as e:
        raise ShapeError(f"reshape: {e}") from e

    def backward(g: np.ndarray):
        return (g.reshape(x.shape),)

    return Tensor.from_op(out, (x,), backward, "reshape")


def sum(x: Tensor) -> Tensor:  # noqa: A001
    def backward(g: np.ndarray):
        return (np.full_like(x.data, float(g)),)

    return Tensor.from_op(np.asarray(x.data.sum()), (x,), backward, "sum")


def mean(x: Tensor) -> Tensor:
    n = max(x.size, 1)

    def backward(g: np.ndarray):
        return (np.full_like(x.data, float(g) / n),)

    return Tensor.from_op(np.asarray(x.data.sum() / n), (x,), backward, "mean")


def straight_through(hard: np.ndarray, soft: Tensor) -> Tensor:
    """Forward the hard values, backward as if they were ``soft``."""
    hard = np.asarray(hard, dtype=np.float64)
    if hard.shape != soft.shape:
        raise ShapeError(f"straight_through: hard {hard.shape} vs soft {soft.shape}")

    def backward(g: np.ndarray):
        return (g,)

    return Tensor.from_op(hard.copy(), (soft,), backward, "straight_through")


def dropout(x: Tensor, rate: float, rng: np.random.Generator | None) -> Tensor:
    """Inverted dropout; identity when ``rate`` is 0 or no generator is given."""
    if rate <= 0.0 or rng is None:
        return x
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return mul(x, Tensor(keep))


def sparse_dropout(s: sp.csr_matrix, rate: float, rng: np.random.Generator | None) -> sp.csr_matrix:
    """Inverted dropout on the stored entries of a constant sparse matrix."""
    if rate <= 0.0 or rng is None:
        return s
    s = sp.csr_matrix(s, copy=True)
    keep = rng.random(s.nnz) >= rate
    s.data = s.data * keep / (1.0 - rate)
    s.eliminate_zeros()
    return s
