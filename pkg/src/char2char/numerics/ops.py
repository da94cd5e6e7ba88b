"""Differentiable primitives over :class:`Tensor`.

Every function computes its forward value with numpy and, when a tape is
active and some input requires a gradient, records a closure that maps the
output gradient to input gradients. Binary ops follow numpy broadcasting.
"""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .tensor import DimensionError, Tensor, active_tape


def as_tensor(x, dtype=None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(x, dtype=dtype)


def _operand(x, like: Tensor):
    # python scalars stay scalars so float32 graphs are not promoted
    if isinstance(x, (int, float)):
        return x
    return as_tensor(x, dtype=like.dtype if not isinstance(x, np.ndarray) else None)


def _result(op: str, data: np.ndarray, inputs: Sequence[Tensor], backward_fn) -> Tensor:
    out = Tensor(data)
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        tape.record(op, out, inputs, backward_fn)
    return out


def unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _broadcast_shape(op: str, a: tuple, b: tuple) -> tuple:
    try:
        return np.broadcast_shapes(a, b)
    except ValueError:
        raise DimensionError(f"{op}: shapes {a} and {b} are not compatible") from None


# ---------------------------------------------------------------- binary ops

def _binary(op, a, b, fwd, bwd_a, bwd_b):
    if not isinstance(a, Tensor) and not isinstance(b, Tensor):
        a = as_tensor(a)
    if isinstance(a, Tensor):
        b = _operand(b, a)
    else:
        a = _operand(a, b)
    ad = a.data if isinstance(a, Tensor) else a
    bd = b.data if isinstance(b, Tensor) else b
    if isinstance(a, Tensor) and isinstance(b, Tensor):
        _broadcast_shape(op, a.shape, b.shape)
    data = fwd(ad, bd)
    inputs = [t for t in (a, b) if isinstance(t, Tensor)]

    def backward(g):
        grads = []
        if isinstance(a, Tensor):
            grads.append(unbroadcast(bwd_a(g, ad, bd, data), a.shape))
        if isinstance(b, Tensor):
            grads.append(unbroadcast(bwd_b(g, ad, bd, data), b.shape))
        return grads

    return _result(op, data, inputs, backward)


def add(a, b) -> Tensor:
    return _binary("add", a, b, np.add, lambda g, x, y, o: g, lambda g, x, y, o: g)


def sub(a, b) -> Tensor:
    return _binary("sub", a, b, np.subtract, lambda g, x, y, o: g, lambda g, x, y, o: -g)


def mul(a, b) -> Tensor:
    return _binary("mul", a, b, np.multiply, lambda g, x, y, o: g * y, lambda g, x, y, o: g * x)


def div(a, b) -> Tensor:
    return _binary(
        "div", a, b, np.divide,
        lambda g, x, y, o: g / y,
        lambda g, x, y, o: -g * o / y,
    )


def neg(a: Tensor) -> Tensor:
    return _result("neg", -a.data, [a], lambda g: [-g])


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product with numpy's batching rules for leading dimensions."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 1:
        raise DimensionError(f"matmul: unsupported shapes {a.shape} and {b.shape}")
    inner_b = b.shape[0] if b.ndim == 1 else b.shape[-2]
    if a.shape[-1] != inner_b:
        raise DimensionError(f"matmul: inner extents differ for shapes {a.shape} and {b.shape}")
    ad, bd = a.data, b.data
    data = ad @ bd

    def backward(g):
        if bd.ndim == 1:
            ga = g[..., None] * bd
            gb = ad.reshape(-1, ad.shape[-1]).T @ g.reshape(-1)
            return [ga, gb]
        if bd.ndim == 2:
            ga = g @ bd.T
            gb = ad.reshape(-1, ad.shape[-1]).T @ g.reshape(-1, g.shape[-1])
            return [ga, gb]
        ga = unbroadcast(g @ np.swapaxes(bd, -1, -2), ad.shape)
        gb = unbroadcast(np.swapaxes(ad, -1, -2) @ g, bd.shape)
        return [ga, gb]

    return _result("matmul", data, [a, b], backward)


# ----------------------------------------------------------------- unary ops

def relu(x: Tensor) -> Tensor:
    mask = x.data > 0  # subgradient 0 at exactly 0
    return _result("relu", x.data * mask, [x], lambda g: [g * mask])


def sigmoid(x: Tensor) -> Tensor:
    xd = x.data
    # split by sign so exp never overflows
    e = np.exp(-np.abs(xd))
    y = np.where(xd >= 0, 1.0 / (1.0 + e), e / (1.0 + e)).astype(xd.dtype, copy=False)
    return _result("sigmoid", y, [x], lambda g: [g * y * (1.0 - y)])


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)
    return _result("tanh", y, [x], lambda g: [g * (1.0 - y * y)])


def exp(x: Tensor) -> Tensor:
    y = np.exp(x.data)
    return _result("exp", y, [x], lambda g: [g * y])


def log(x: Tensor) -> Tensor:
    xd = x.data
    return _result("log", np.log(xd), [x], lambda g: [g / xd])


def elementwise(op: str, *args) -> Tensor:
    """Dispatch by name: relu, sigmoid, tanh (unary) or add, mul, sub (binary)."""
    table = {"relu": relu, "sigmoid": sigmoid, "tanh": tanh, "add": add, "mul": mul, "sub": sub}
    if op not in table:
        raise ValueError(f"unknown elementwise op {op!r}")
    return table[op](*args)


# --------------------------------------------------------------- reductions

def sum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    data = np.sum(x.data, axis=axis, keepdims=keepdims)
    shape = x.shape

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return [np.broadcast_to(g, shape)]

    return _result("sum", np.asarray(data), [x], backward)


def mean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    n = x.size if axis is None else int(np.prod([x.shape[a] for a in np.atleast_1d(axis)]))
    return mul(sum(x, axis=axis, keepdims=keepdims), 1.0 / n)


def softmax(x: Tensor, axis: int = -1, mask: Optional[np.ndarray] = None) -> Tensor:
    """Max-shifted softmax. Entries where ``mask`` is False get probability 0."""
    xd = x.data
    if xd.shape[axis] == 0:
        raise DimensionError("softmax over an empty axis")
    z = xd if mask is None else np.where(mask, xd, -np.inf)
    m = np.max(z, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    e = np.exp(z - m)
    s = np.sum(e, axis=axis, keepdims=True)
    y = (e / np.where(s == 0, 1.0, s)).astype(xd.dtype, copy=False)

    def backward(g):
        return [y * (g - np.sum(g * y, axis=axis, keepdims=True))]

    return _result("softmax", y, [x], backward)


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    xd = x.data
    m = np.max(xd, axis=axis, keepdims=True)
    shifted = xd - m
    lse = np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))
    y = shifted - lse

    def backward(g):
        return [g - np.exp(y) * np.sum(g, axis=axis, keepdims=True)]

    return _result("log_softmax", y, [x], backward)


# ------------------------------------------------------------- shape/index

def reshape(x: Tensor, shape) -> Tensor:
    old = x.shape
    return _result("reshape", x.data.reshape(shape), [x], lambda g: [g.reshape(old)])


def transpose(x: Tensor, axes=None) -> Tensor:
    data = np.transpose(x.data, axes)
    inv = None if axes is None else np.argsort(axes)
    return _result("transpose", data, [x], lambda g: [np.transpose(g, inv)])


def _is_basic_index(index) -> bool:
    items = index if isinstance(index, tuple) else (index,)
    return all(isinstance(i, (int, np.integer, slice)) or i is None or i is Ellipsis for i in items)


def getitem(x: Tensor, index) -> Tensor:
    data = x.data[index]
    shape, dtype = x.shape, x.dtype
    basic = _is_basic_index(index)

    def backward(g):
        gx = np.zeros(shape, dtype=dtype)
        if basic:
            gx[index] += g
        else:
            np.add.at(gx, index, g)
        return [gx]

    return _result("getitem", np.array(data, copy=not basic) if not basic else data, [x], backward)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return np.split(g, sizes, axis=axis)

    return _result("concat", data, tensors, backward)


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    data = np.stack([t.data for t in tensors], axis=axis)

    def backward(g):
        return [np.take(g, i, axis=axis) for i in range(len(tensors))]

    return _result("stack", data, tensors, backward)


def where(cond: np.ndarray, x: Tensor, y) -> Tensor:
    """``x`` where ``cond`` holds, else ``y``; ``cond`` is a constant."""
    cond = np.asarray(cond, dtype=bool)
    if isinstance(y, Tensor):
        data = np.where(cond, x.data, y.data)
        return _result(
            "where", data, [x, y],
            lambda g: [unbroadcast(np.where(cond, g, 0.0), x.shape),
                       unbroadcast(np.where(cond, 0.0, g), y.shape)],
        )
    data = np.where(cond, x.data, y).astype(x.dtype, copy=False)
    return _result("where", data, [x], lambda g: [unbroadcast(np.where(cond, g, 0.0), x.shape)])


def embedding(table: Tensor, indices) -> Tensor:
    """Rows of ``table`` selected by an integer array of any shape."""
    idx = np.asarray(indices)
    if idx.dtype.kind not in "iu":
        raise TypeError("embedding indices must be integers")
    vocab = table.shape[0]
    if idx.size and (idx.min() < 0 or idx.max() >= vocab):
        raise IndexError(f"symbol index out of range for table with {vocab} rows")
    data = table.data[idx]

    def backward(g):
        gt = np.zeros_like(table.data)
        np.add.at(gt, idx.reshape(-1), g.reshape(-1, table.shape[1]))
        return [gt]

    return _result("embedding", data, [table], backward)


def pick(x: Tensor, indices) -> Tensor:
    """``out[..., ] = x[..., indices[...]]`` along the last axis."""
    idx = np.asarray(indices)[..., None]
    data = np.take_along_axis(x.data, idx, axis=-1)[..., 0]

    def backward(g):
        gx = np.zeros_like(x.data)
        np.put_along_axis(gx, idx, g[..., None], axis=-1)
        return [gx]

    return _result("pick", data, [x], backward)


# ------------------------------------------------------ convolution/pooling

def half_padding(width: int) -> tuple[int, int]:
    """Zero columns added (left, right) so a width-``width`` filter keeps the length."""
    total = width - 1
    return total // 2, total - total // 2


def unfold1d(x: Tensor, width: int) -> Tensor:
    """Sliding windows over time with half padding.

    ``x`` is (batch, time, channels); the result is (batch, time, width*channels)
    where window ``t`` holds input positions ``t-left .. t+right`` flattened
    time-major, zeros outside the sequence.
    """
    if x.ndim != 3:
        raise DimensionError(f"unfold1d expects (batch, time, channels), got {x.shape}")
    B, T, C = x.shape
    if T == 0:
        raise DimensionError("unfold1d on an empty sequence")
    left, right = half_padding(width)
    padded = np.zeros((B, T + width - 1, C), dtype=x.dtype)
    padded[:, left:left + T] = x.data
    win = np.lib.stride_tricks.sliding_window_view(padded, width, axis=1)  # B,T,C,w
    data = np.ascontiguousarray(np.swapaxes(win, 2, 3)).reshape(B, T, width * C)

    def backward(g):
        g = g.reshape(B, T, width, C)
        gp = np.zeros((B, T + width - 1, C), dtype=g.dtype)
        for j in range(width):
            gp[:, j:j + T] += g[:, :, j]
        return [gp[:, left:left + T]]

    return _result("unfold1d", data, [x], backward)


def maxpool1d(x: Tensor, stride: int, valid: Optional[np.ndarray] = None) -> Tensor:
    """Non-overlapping max over time windows of ``stride`` steps.

    ``x`` is (batch, time, channels) and the output has ``ceil(time/stride)``
    steps; the final window may be short. Positions where ``valid`` is False
    are ignored, and a window with no valid position yields 0. Ties send the
    gradient to the earliest maximal position.
    """
    if stride < 1:
        raise ValueError("pool stride must be >= 1")
    B, T, N = x.shape
    K = -(-T // stride)
    padded = np.full((B, K * stride, N), -np.inf, dtype=x.dtype)
    if valid is None:
        padded[:, :T] = x.data
    else:
        padded[:, :T] = np.where(np.asarray(valid, bool)[:, :, None], x.data, -np.inf)
    windows = padded.reshape(B, K, stride, N)
    arg = np.argmax(windows, axis=2)  # first max on ties
    data = np.take_along_axis(windows, arg[:, :, None, :], axis=2)[:, :, 0, :]
    empty = ~np.isfinite(data)
    data = np.where(empty, 0.0, data).astype(x.dtype, copy=False)

    def backward(g):
        gw = np.zeros((B, K, stride, N), dtype=g.dtype)
        np.put_along_axis(gw, arg[:, :, None, :], np.where(empty, 0.0, g)[:, :, None, :], axis=2)
        return [gw.reshape(B, K * stride, N)[:, :T]]

    return _result("maxpool1d", data, [x], backward)
