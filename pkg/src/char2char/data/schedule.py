"""Minibatch streams: shuffled epochs for one corpus, balanced batches across several."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .corpus import ParallelCorpus


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class ScheduleSpec:
    """Number of pairs each language pair contributes to every minibatch."""

    quotas: tuple

    def __post_init__(self):
        object.__setattr__(self, "quotas", tuple(int(q) for q in self.quotas))
        if not self.quotas or any(q < 1 for q in self.quotas):
            raise ScheduleError(f"quotas must all be >= 1, got {self.quotas}")

    @property
    def batch_size(self) -> int:
        return sum(self.quotas)

    @classmethod
    def proportional(cls, sizes: Sequence[float], batch_size: int) -> "ScheduleSpec":
        """Quotas proportional to corpus sizes, rounded by largest remainder.

        With the sizes 4.5m, 12.1m, 1.9m, 2.3m and batch 64 this gives 14, 37, 6, 7.
        """
        sizes = np.asarray(sizes, dtype=float)
        if batch_size < len(sizes):
            raise ScheduleError("batch too small to give every pair a slot")
        exact = sizes / sizes.sum() * batch_size
        quotas = np.floor(exact).astype(int)
        order = sorted(range(len(sizes)), key=lambda i: (-(exact[i] - quotas[i]), i))
        for i in order[: batch_size - quotas.sum()]:
            quotas[i] += 1
        # a tiny corpus still gets one slot, taken from the largest quota
        while (quotas < 1).any():
            quotas[np.argmin(quotas)] += 1
            quotas[np.argmax(quotas)] -= 1
        return cls(tuple(int(q) for q in quotas))


@dataclass
class Minibatch:
    pairs: list
    tags: list  # language pair of every item; bookkeeping only, never shown to the model


def epoch_stream(n: int, rng: np.random.Generator) -> Iterator[int]:
    """Indices 0..n-1 in a fresh random order each epoch, forever."""
    while True:
        yield from rng.permutation(n).tolist()


def shuffled_minibatches(corpus: ParallelCorpus, batch_size: int, seed: int) -> Iterator[Minibatch]:
    if len(corpus) == 0:
        raise ScheduleError(f"corpus {corpus.tag!r} is empty")
    stream = epoch_stream(len(corpus), np.random.default_rng(seed))
    pairs = corpus.pairs()
    while True:
        idx = [next(stream) for _ in range(batch_size)]
        yield Minibatch([pairs[i] for i in idx], [corpus.tag] * batch_size)


def balanced_minibatch(corpora: Sequence[ParallelCorpus], spec: ScheduleSpec, seed: int) -> Iterator[Minibatch]:
    """Endless minibatches holding exactly ``quota[p]`` pairs of language pair ``p``.

    Each pair is drawn from its own seeded shuffled epochs; the per-pair slices
    are concatenated in corpus order into one minibatch.
    """
    if len(corpora) != len(spec.quotas):
        raise ScheduleError(f"{len(corpora)} corpora but {len(spec.quotas)} quotas")
    for c in corpora:
        if len(c) == 0:
            raise ScheduleError(f"corpus {c.tag!r} is empty but has a quota")
    rngs = np.random.default_rng(seed).spawn(len(corpora))
    streams = [epoch_stream(len(c), r) for c, r in zip(corpora, rngs)]
    all_pairs = [c.pairs() for c in corpora]
    while True:
        pairs, tags = [], []
        for c, q, stream, cp in zip(corpora, spec.quotas, streams, all_pairs):
            for _ in range(q):
                pairs.append(cp[next(stream)])
                tags.append(c.tag)
        yield Minibatch(pairs, tags)
