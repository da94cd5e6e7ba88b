"""Byte-pair-encoding merge learning and application.

Each word is split into characters followed by an end-of-word marker, which is
its own symbol, so ``low`` starts as ``l o w </w>``. Learning repeatedly merges
the most frequent adjacent pair; among equally frequent pairs the
lexicographically smallest (left, then right) wins. Pair counts include
overlapping occurrences, merges are applied left to right without overlap.
"""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

END_OF_WORD = "</w>"
MERGES_HEADER = "#bpe-merges v1"


class MergeFileError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass
class MergeTable:
    merges: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.merges)

    def __iter__(self):
        return iter(self.merges)

    def ranks(self) -> dict:
        return {pair: i for i, pair in enumerate(self.merges)}

    def save(self, path: Union[str, Path]) -> None:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(MERGES_HEADER + "\n")
            for left, right in self.merges:
                f.write(f"{left} {right}\n")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "MergeTable":
        with open(path, encoding="utf-8", newline="") as f:
            lines = f.read().split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines or lines[0] != MERGES_HEADER:
            raise MergeFileError(1, f"expected header {MERGES_HEADER!r}")
        merges = []
        known: set = set()
        for lineno, line in enumerate(lines[1:], 2):
            parts = line.split(" ")
            if len(parts) != 2 or not all(parts):
                raise MergeFileError(lineno, f"expected 'left right', got {line!r}")
            for sym in parts:
                if len(sym) > 1 and sym != END_OF_WORD and sym not in known:
                    raise MergeFileError(lineno, f"{sym!r} is not produced by an earlier merge")
            merges.append((parts[0], parts[1]))
            known.add(parts[0] + parts[1])
        return cls(merges)


def word_counts(corpus: Iterable[str]) -> Counter:
    counts: Counter = Counter()
    for line in corpus:
        counts.update(line.split())
    return counts


def _merge_word(symbols: tuple, pair: tuple, joined: str) -> tuple:
    out = []
    i = 0
    n = len(symbols)
    while i < n:
        if i < n - 1 and symbols[i] == pair[0] and symbols[i + 1] == pair[1]:
            out.append(joined)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return tuple(out)


def _best(stats: dict) -> tuple | None:
    best, best_count = None, 1  # a pair must occur at least twice
    for pair, count in stats.items():
        if count > best_count or (count == best_count and best is not None and pair < best):
            best, best_count = pair, count
    return best


def learn_bpe(corpus: Iterable[str], num_ops: int) -> MergeTable:
    """Learn up to ``num_ops`` merges from whitespace-tokenized lines.

    Stops early once no adjacent pair occurs at least twice.
    """
    if num_ops < 1:
        raise ValueError("num_ops must be >= 1")
    vocab = [(tuple(word) + (END_OF_WORD,), freq) for word, freq in sorted(word_counts(corpus).items())]
    words = [w for w, _ in vocab]
    freqs = [f for _, f in vocab]

    stats: dict = defaultdict(int)
    where: dict = defaultdict(set)  # pair -> indices of words containing it
    for idx, word in enumerate(words):
        for pair in zip(word, word[1:]):
            stats[pair] += freqs[idx]
            where[pair].add(idx)

    merges = []
    for _ in range(num_ops):
        pair = _best(stats)
        if pair is None:
            break
        merges.append(pair)
        joined = pair[0] + pair[1]
        for idx in sorted(where[pair]):
            old = words[idx]
            new = _merge_word(old, pair, joined)
            if new == old:
                continue
            f = freqs[idx]
            for p in zip(old, old[1:]):
                stats[p] -= f
                if stats[p] == 0:
                    del stats[p]
            for p in zip(new, new[1:]):
                stats[p] += f
                where[p].add(idx)
            words[idx] = new
        stats.pop(pair, None)
        where.pop(pair, None)
    return MergeTable(merges)


def segment_word(word: str, merges: Union[MergeTable, Sequence[tuple]], ranks: dict | None = None) -> list[str]:
    """Replay merges in learned order on one word; the last subword keeps the marker."""
    if ranks is None:
        ranks = {pair: i for i, pair in enumerate(merges)}
    symbols = tuple(word) + (END_OF_WORD,)
    while len(symbols) > 1:
        pairs = set(zip(symbols, symbols[1:]))
        pair = min(pairs, key=lambda p: ranks.get(p, float("inf")))
        if pair not in ranks:
            break
        symbols = _merge_word(symbols, pair, pair[0] + pair[1])
    # glue a lone marker onto the previous subword
    if len(symbols) > 1 and symbols[-1] == END_OF_WORD:
        symbols = symbols[:-2] + (symbols[-2] + END_OF_WORD,)
    return list(symbols)


def apply_bpe(sentence: str, merges: Union[MergeTable, Sequence[tuple]]) -> list[str]:
    """Subword tokens for a sentence. Word-final tokens end with ``</w>``."""
    ranks = {pair: i for i, pair in enumerate(merges)}
    cache: dict = {}
    out: list[str] = []
    for word in sentence.split():
        if word not in cache:
            cache[word] = segment_word(word, merges, ranks)
        out.extend(cache[word])
    return out


def detokenize(subwords: Iterable[str]) -> str:
    """Undo :func:`apply_bpe`: join subwords, word ends at each marker."""
    text = "".join(subwords)
    return " ".join(w for w in text.split(END_OF_WORD) if w)
