"""Functional building blocks of the encoder and decoder.

All sequence tensors are laid out (batch, time, features).
"""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .. import numerics as nx
from ..numerics import Tensor


def embed_source(indices, table: Tensor) -> Tensor:
    """Look up one embedding row per symbol index."""
    return nx.embedding(table, np.asarray(indices))


def half_conv(x: Tensor, bank: Sequence[tuple]) -> Tensor:
    """Filter bank convolution that preserves sequence length.

    ``bank`` holds ``(width, W, b)`` with ``W`` of shape (width*channels, count).
    A width-w filter sees ``floor((w-1)/2)`` zero columns on the left and
    ``ceil((w-1)/2)`` on the right. Outputs of all widths are stacked along the
    feature axis; no activation is applied here.
    """
    if x.shape[1] == 0:
        raise nx.DimensionError("half_conv on an empty sequence")
    outs = [nx.matmul(nx.unfold1d(x, width), W) + b for width, W, b in bank]
    return outs[0] if len(outs) == 1 else nx.concat(outs, axis=-1)


def maxpool_stride(y: Tensor, stride: int, valid: Optional[np.ndarray] = None) -> Tensor:
    """Max over non-overlapping windows of ``stride`` steps; the last may be short."""
    return nx.maxpool1d(y, stride, valid)


def highway(x: Tensor, W1: Tensor, b1: Tensor, W2: Tensor, b2: Tensor) -> Tensor:
    gate = nx.sigmoid(nx.matmul(x, W2) + b2)
    return gate * nx.relu(nx.matmul(x, W1) + b1) + (1.0 - gate) * x


def highway_stack(x: Tensor, layers: Sequence[tuple]) -> Tensor:
    """Apply highway layers in order, independently at every position."""
    for W1, b1, W2, b2 in layers:
        x = highway(x, W1, b1, W2, b2)
    return x


def gru_step(x_proj: Tensor, h: Tensor, U_zr: Tensor, U_h: Tensor) -> Tensor:
    """One GRU update from a precomputed input projection ``x @ Wx + b``.

    The projection is laid out [update | reset | candidate].
    """
    k = h.shape[-1]
    zr = nx.sigmoid(x_proj[..., :2 * k] + nx.matmul(h, U_zr))
    z, r = zr[..., :k], zr[..., k:]
    cand = nx.tanh(x_proj[..., 2 * k:] + nx.matmul(r * h, U_h))
    return h + z * (cand - h)


def gru_cell(x: Tensor, h: Tensor, params: dict) -> Tensor:
    """GRU with reset applied before the candidate's recurrent product.

    z = sigmoid(Wx_z x + U_z h + b_z), r = sigmoid(Wx_r x + U_r h + b_r),
    cand = tanh(Wx_h x + U_h (r * h) + b_h), h' = (1 - z) h + z cand.
    ``params`` holds ``Wx`` (d, 3k), ``U_zr`` (k, 2k), ``U_h`` (k, k), ``b`` (3k).
    """
    return gru_step(nx.matmul(x, params["Wx"]) + params["b"], h, params["U_zr"], params["U_h"])


def gru_sequence(x: Tensor, mask: np.ndarray, params: dict, reverse: bool = False) -> Tensor:
    """Run a GRU over (batch, time, d); masked steps carry the state through."""
    B, T, _ = x.shape
    k = params["U_h"].shape[0]
    proj = nx.matmul(x, params["Wx"]) + params["b"]
    h = Tensor(np.zeros((B, k), dtype=x.dtype))
    states = [None] * T
    steps = range(T - 1, -1, -1) if reverse else range(T)
    for t in steps:
        h_new = gru_step(proj[:, t], h, params["U_zr"], params["U_h"])
        m = mask[:, t:t + 1]
        h = h_new if m.all() else nx.where(m, h_new, h)
        states[t] = h
    return nx.stack(states, axis=1)


def bidirectional_gru(x: Tensor, mask: np.ndarray, forward: dict, backward: dict) -> Tensor:
    """Concatenate forward and backward GRU states at every step."""
    return nx.concat([gru_sequence(x, mask, forward), gru_sequence(x, mask, backward, reverse=True)], axis=-1)
