"""The character-to-character attentional encoder-decoder."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .. import numerics as nx
from ..numerics import Tensor
from . import layers
from .config import ModelConfig


def parameter_shapes(config: ModelConfig) -> dict[str, tuple]:
    """Canonical parameter names and shapes, in a fixed order.

    Weight matrices multiply from the right (``x @ W``), so a matrix that maps
    d inputs to k outputs has shape (d, k). Embedding tables hold one row per
    symbol. GRU ``Wx``/``b`` stack the update, reset and candidate blocks.
    """
    c = config
    H, K = c.encoder_hidden, c.decoder_hidden
    shapes: dict[str, tuple] = {"src_emb": (c.source_vocab_size, c.source_emb_dim)}
    for width, count in c.filter_bank:
        shapes[f"conv.{width}.W"] = (width * c.source_emb_dim, count)
        shapes[f"conv.{width}.b"] = (count,)
    N = c.segment_dim
    for i in range(c.highway_layers):
        shapes[f"highway.{i}.W1"] = (N, N)
        shapes[f"highway.{i}.b1"] = (N,)
        shapes[f"highway.{i}.W2"] = (N, N)
        shapes[f"highway.{i}.b2"] = (N,)
    for d in ("fwd", "bwd"):
        shapes[f"enc.{d}.Wx"] = (N, 3 * H)
        shapes[f"enc.{d}.U_zr"] = (H, 2 * H)
        shapes[f"enc.{d}.U_h"] = (H, H)
        shapes[f"enc.{d}.b"] = (3 * H,)
    for i in range(c.decoder_layers):
        shapes[f"dec.init.{i}.W"] = (2 * H, K)
        shapes[f"dec.init.{i}.b"] = (K,)
    shapes["tgt_emb"] = (c.target_vocab_size, c.target_emb_dim)
    shapes["att.W_emb"] = (c.target_emb_dim, c.attention_dim)
    shapes["att.W_state"] = (K, c.attention_dim)
    shapes["att.W_src"] = (2 * H, c.attention_dim)
    shapes["att.b"] = (c.attention_dim,)
    shapes["att.v"] = (c.attention_dim,)
    for i in range(c.decoder_layers):
        d_in = (c.target_emb_dim if i == 0 else K) + 2 * H
        shapes[f"dec.gru.{i}.Wx"] = (d_in, 3 * K)
        shapes[f"dec.gru.{i}.U_zr"] = (K, 2 * K)
        shapes[f"dec.gru.{i}.U_h"] = (K, K)
        shapes[f"dec.gru.{i}.b"] = (3 * K,)
    shapes["out.W_hid"] = (c.target_emb_dim + K + 2 * H, c.readout_dim)
    shapes["out.b_hid"] = (c.readout_dim,)
    shapes["out.W"] = (c.readout_dim, c.target_vocab_size)
    shapes["out.b"] = (c.target_vocab_size,)
    return shapes


def count_parameters(config: ModelConfig) -> int:
    return int(sum(np.prod(s) for s in parameter_shapes(config).values()))


@dataclass
class EncodedSource:
    """Per-segment source annotations attended by the decoder.

    ``segments`` is (batch, S, 2*encoder_hidden); ``mask`` marks real segments;
    ``keys`` caches the attention projection of the segments.
    """

    segments: Tensor
    mask: np.ndarray
    source_lengths: np.ndarray
    keys: Tensor

    @property
    def num_segments(self) -> np.ndarray:
        return self.mask.sum(axis=1)

    def repeat(self, n: int) -> "EncodedSource":
        """Tile a single-sentence encoding ``n`` times along the batch axis."""
        if self.segments.shape[0] != 1:
            raise ValueError("repeat() expects a batch of one")
        return EncodedSource(
            Tensor(np.repeat(self.segments.data, n, axis=0)),
            np.repeat(self.mask, n, axis=0),
            np.repeat(self.source_lengths, n),
            Tensor(np.repeat(self.keys.data, n, axis=0)),
        )


@dataclass
class DecoderState:
    """Hidden state of every decoder layer plus the previously emitted symbols."""

    layers: list = field(default_factory=list)
    prev: Optional[np.ndarray] = None

    def feed(self, symbols) -> "DecoderState":
        return DecoderState(list(self.layers), np.asarray(symbols, dtype=np.int64))

    def select(self, rows) -> "DecoderState":
        rows = np.asarray(rows)
        return DecoderState([Tensor(h.data[rows]) for h in self.layers], None if self.prev is None else self.prev[rows])


class Char2Char:
    def __init__(self, config: ModelConfig, params: dict[str, Tensor]):
        shapes = parameter_shapes(config)
        missing = set(shapes) - set(params)
        extra = set(params) - set(shapes)
        if missing or extra:
            raise ValueError(f"parameter names do not match config (missing {sorted(missing)}, unexpected {sorted(extra)})")
        bad = [f"{k}: expected {shapes[k]}, got {tuple(params[k].shape)}" for k in shapes if tuple(params[k].shape) != shapes[k]]
        if bad:
            raise ValueError("parameter shapes do not match config: " + "; ".join(bad))
        self.config = config
        self.params = {k: params[k] for k in shapes}

    @classmethod
    def initialized(cls, config: ModelConfig, seed: int = 0, init_range: float = 0.01, dtype=np.float32) -> "Char2Char":
        from ..train.optim import init_parameters

        return cls(config, init_parameters(config, seed=seed, init_range=init_range, dtype=dtype))

    def parameters(self) -> dict[str, Tensor]:
        return self.params

    @property
    def dtype(self):
        return self.params["src_emb"].dtype

    def astype(self, dtype) -> "Char2Char":
        return Char2Char(self.config, {k: Tensor(p.data.astype(dtype), requires_grad=p.requires_grad, name=k) for k, p in self.params.items()})

    def copy(self) -> "Char2Char":
        return self.astype(self.dtype)

    def _gru(self, prefix: str) -> dict:
        p = self.params
        return {"Wx": p[prefix + ".Wx"], "U_zr": p[prefix + ".U_zr"], "U_h": p[prefix + ".U_h"], "b": p[prefix + ".b"]}

    # ------------------------------------------------------------- encoder

    def segment_embeddings(self, src: np.ndarray, src_mask: Optional[np.ndarray] = None) -> tuple[Tensor, np.ndarray]:
        """Embedding, filter bank, ReLU, strided max-pooling and highway layers.

        Returns (batch, S, N) segment embeddings and the (batch, S) segment mask,
        with S = ceil(T/stride) for the padded length T.
        """
        c, p = self.config, self.params
        src = np.asarray(src)
        if src.ndim == 1:
            src = src[None]
        if src_mask is None:
            src_mask = np.ones(src.shape, dtype=bool)
        if src.shape[1] == 0:
            raise nx.DimensionError("empty source sequence")
        x = layers.embed_source(src, p["src_emb"])
        if not c.filter_bank:
            return x, src_mask
        if not src_mask.all():
            x = x * src_mask[:, :, None].astype(self.dtype)
        bank = [(w, p[f"conv.{w}.W"], p[f"conv.{w}.b"]) for w, _ in c.filter_bank]
        y = nx.relu(layers.half_conv(x, bank))
        pooled = layers.maxpool_stride(y, c.pool_stride, None if src_mask.all() else src_mask)
        hw = [(p[f"highway.{i}.W1"], p[f"highway.{i}.b1"], p[f"highway.{i}.W2"], p[f"highway.{i}.b2"]) for i in range(c.highway_layers)]
        segs = layers.highway_stack(pooled, hw)
        lengths = src_mask.sum(axis=1)
        n_seg = -(-lengths // c.pool_stride)
        seg_mask = np.arange(segs.shape[1])[None, :] < n_seg[:, None]
        return segs, seg_mask

    def encode(self, src: np.ndarray, src_mask: Optional[np.ndarray] = None) -> EncodedSource:
        src = np.asarray(src)
        if src.ndim == 1:
            src = src[None]
        if src_mask is None:
            src_mask = np.ones(src.shape, dtype=bool)
        segs, seg_mask = self.segment_embeddings(src, src_mask)
        annotations = layers.bidirectional_gru(segs, seg_mask, self._gru("enc.fwd"), self._gru("enc.bwd"))
        keys = nx.matmul(annotations, self.params["att.W_src"])
        return EncodedSource(annotations, seg_mask, src_mask.sum(axis=1), keys)

    # ------------------------------------------------------------- decoder

    def initial_state(self, enc: EncodedSource) -> DecoderState:
        """Each layer starts from tanh(W mean(segments) + b); prev symbol is BOS."""
        from ..data.vocab import BOS_ID

        p = self.params
        m = enc.mask.astype(self.dtype)
        summed = nx.sum(enc.segments * m[:, :, None], axis=1)
        mean = summed * (1.0 / np.maximum(m.sum(axis=1, keepdims=True), 1.0)).astype(self.dtype)
        states = [nx.tanh(nx.matmul(mean, p[f"dec.init.{i}.W"]) + p[f"dec.init.{i}.b"]) for i in range(self.config.decoder_layers)]
        return DecoderState(states, np.full(enc.mask.shape[0], BOS_ID, dtype=np.int64))

    def attend(self, prev_emb: Tensor, prev_state: Tensor, enc: EncodedSource, emb_proj: Optional[Tensor] = None) -> tuple[Tensor, Tensor]:
        """Attention weights over segments and the resulting context vector.

        The score of segment k is v . tanh(W_emb e + W_state s + W_src h_k + b),
        normalized by a softmax over the real segments.
        """
        p = self.params
        if emb_proj is None:
            emb_proj = nx.matmul(prev_emb, p["att.W_emb"])
        query = emb_proj + nx.matmul(prev_state, p["att.W_state"]) + p["att.b"]
        B, S, A = enc.keys.shape
        hidden = nx.tanh(enc.keys + nx.reshape(query, (B, 1, A)))
        scores = nx.matmul(hidden, p["att.v"])
        weights = nx.softmax(scores, axis=-1, mask=enc.mask)
        context = nx.reshape(nx.matmul(nx.reshape(weights, (B, 1, S)), enc.segments), (B, enc.segments.shape[2]))
        return weights, context

    def _advance(self, emb: Tensor, layers_prev: Sequence[Tensor], context: Tensor,
                 x0_proj: Optional[Tensor] = None, W0_ctx: Optional[Tensor] = None) -> list[Tensor]:
        """Step every decoder layer; each one also receives the context vector.

        ``x0_proj``/``W0_ctx`` let the caller hoist the embedding half of the
        first layer's input projection out of a time loop.
        """
        new = []
        below = emb
        for i, h in enumerate(layers_prev):
            g = self._gru(f"dec.gru.{i}")
            if i == 0 and x0_proj is not None:
                xp = x0_proj + nx.matmul(context, W0_ctx)
            else:
                xp = nx.matmul(nx.concat([below, context], axis=-1), g["Wx"]) + g["b"]
            below = layers.gru_step(xp, h, g["U_zr"], g["U_h"])
            new.append(below)
        return new

    def readout(self, emb: Tensor, top: Tensor, context: Tensor) -> Tensor:
        """Log-probabilities over the target vocabulary from (E_y(y_prev), s_t, c_t)."""
        p = self.params
        hid = nx.tanh(nx.matmul(nx.concat([emb, top, context], axis=-1), p["out.W_hid"]) + p["out.b_hid"])
        return nx.log_softmax(nx.matmul(hid, p["out.W"]) + p["out.b"], axis=-1)

    def decode_step(self, state: DecoderState, enc: EncodedSource) -> tuple[DecoderState, Tensor]:
        """Advance one target position. Returns the new state and log-probabilities.

        The returned state keeps ``prev``; call ``feed`` with the chosen symbols.
        """
        emb = nx.embedding(self.params["tgt_emb"], state.prev)
        _, context = self.attend(emb, state.layers[-1], enc)
        new_layers = self._advance(emb, state.layers, context)
        logp = self.readout(emb, new_layers[-1], context)
        return DecoderState(new_layers, state.prev), logp

    def attention_weights(self, state: DecoderState, enc: EncodedSource) -> Tensor:
        emb = nx.embedding(self.params["tgt_emb"], state.prev)
        return self.attend(emb, state.layers[-1], enc)[0]

    # ------------------------------------------------------------ training

    def teacher_forced_logprobs(self, batch) -> Tensor:
        """(batch, T_y, V) log-probabilities of every target position given the gold prefix."""
        p = self.params
        enc = self.encode(batch.src, batch.src_mask)
        state = self.initial_state(enc)
        emb_all = nx.embedding(p["tgt_emb"], batch.tgt_in)  # B,T,e
        att_all = nx.matmul(emb_all, p["att.W_emb"])
        e_dim = self.config.target_emb_dim
        g0 = self._gru("dec.gru.0")
        x0_all = nx.matmul(emb_all, g0["Wx"][:e_dim]) + g0["b"]
        W0_ctx = g0["Wx"][e_dim:]
        tops, contexts = [], []
        layer_states = state.layers
        for t in range(batch.tgt_in.shape[1]):
            emb = emb_all[:, t]
            _, context = self.attend(emb, layer_states[-1], enc, emb_proj=att_all[:, t])
            layer_states = self._advance(emb, layer_states, context, x0_proj=x0_all[:, t], W0_ctx=W0_ctx)
            tops.append(layer_states[-1])
            contexts.append(context)
        return self.readout(emb_all, nx.stack(tops, axis=1), nx.stack(contexts, axis=1))

    def loss(self, batch) -> Tensor:
        from ..train.loss import nll_loss

        return nll_loss(self.teacher_forced_logprobs(batch), batch.tgt_out, batch.tgt_mask)
