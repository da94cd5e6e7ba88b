"""Padding parallel index sequences into model-ready minibatches."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .vocab import BOS_ID, EOS_ID, PAD_ID


@dataclass
class Batch:
    """A padded minibatch. Masks are True on real (non-PAD) positions.

    Sources end with EOS; targets are fed as BOS + y and predicted as y + EOS.
    """

    src: np.ndarray
    src_mask: np.ndarray
    tgt_in: np.ndarray
    tgt_out: np.ndarray
    tgt_mask: np.ndarray

    @property
    def size(self) -> int:
        return self.src.shape[0]

    @property
    def num_tokens(self) -> int:
        return int(self.tgt_mask.sum())


def pad(seqs: Sequence[Sequence[int]]) -> tuple[np.ndarray, np.ndarray]:
    T = max(len(s) for s in seqs)
    ids = np.full((len(seqs), T), PAD_ID, dtype=np.int64)
    mask = np.zeros((len(seqs), T), dtype=bool)
    for i, s in enumerate(seqs):
        ids[i, :len(s)] = s
        mask[i, :len(s)] = True
    return ids, mask


def make_batch(pairs: Sequence[tuple[Sequence[int], Sequence[int]]]) -> Batch:
    """Build a batch from (source indices, target indices) without sentinels."""
    if not pairs:
        raise ValueError("empty batch")
    src, src_mask = pad([list(s) + [EOS_ID] for s, _ in pairs])
    tgt_in, tgt_mask = pad([[BOS_ID] + list(t) for _, t in pairs])
    tgt_out, _ = pad([list(t) + [EOS_ID] for _, t in pairs])
    return Batch(src, src_mask, tgt_in, tgt_out, tgt_mask)


def make_source(seqs: Sequence[Sequence[int]]) -> tuple[np.ndarray, np.ndarray]:
    """Padded source indices with EOS appended, for decoding."""
    return pad([list(s) + [EOS_ID] for s in seqs])
