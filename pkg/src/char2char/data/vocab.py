"""Symbol/index bijections for characters and subwords."""
from __future__ import annotations

from collections import Counter
from pathlib import Path
from typing import Iterable, Sequence, Union

UNK, PAD, BOS, EOS = "<unk>", "<pad>", "<s>", "</s>"
RESERVED = (UNK, PAD, BOS, EOS)
UNK_ID, PAD_ID, BOS_ID, EOS_ID = range(4)


class Vocabulary:
    """Bijection between symbols and dense indices.

    The four reserved symbols always occupy indices 0..3 in the order
    UNK, PAD, BOS, EOS. ``kind`` is ``"char"`` (a sentence is a sequence of
    Unicode code points) or ``"subword"`` (a sentence is a list of tokens).
    """

    unk_id, pad_id, bos_id, eos_id = UNK_ID, PAD_ID, BOS_ID, EOS_ID

    def __init__(self, symbols: Sequence[str], kind: str = "char"):
        symbols = list(symbols)
        if tuple(symbols[:4]) != RESERVED:
            symbols = list(RESERVED) + [s for s in symbols if s not in RESERVED]
        if len(set(symbols)) != len(symbols):
            raise ValueError("duplicate symbols in vocabulary")
        if kind not in ("char", "subword"):
            raise ValueError(f"unknown vocabulary kind {kind!r}")
        self.kind = kind
        self.symbols = symbols
        self._index = {s: i for i, s in enumerate(symbols)}

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.kind == other.kind and self.symbols == other.symbols

    def index(self, symbol: str) -> int:
        return self._index.get(symbol, UNK_ID)

    def symbol(self, index: int) -> str:
        return self.symbols[index]

    def encode(self, sentence: Union[str, Sequence[str]]) -> list[int]:
        """Indices of a sentence, without sentinels. Unknown symbols map to UNK."""
        return [self._index.get(s, UNK_ID) for s in sentence]

    def decode(self, indices: Iterable[int]) -> str:
        """Inverse of :meth:`encode`; stops at EOS and drops other reserved symbols."""
        out = []
        for i in indices:
            i = int(i)
            if i == EOS_ID:
                break
            if i < len(RESERVED):
                continue
            out.append(self.symbols[i])
        return "".join(out) if self.kind == "char" else " ".join(out)

    def save(self, path: Union[str, Path]) -> None:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write("".join(s + "\n" for s in self.symbols))

    @classmethod
    def load(cls, path: Union[str, Path], kind: str = "char") -> "Vocabulary":
        with open(path, encoding="utf-8", newline="") as f:
            text = f.read()
        if not text.endswith("\n"):
            raise ValueError(f"{path}: vocabulary file must end with a newline")
        return cls(text[:-1].split("\n"), kind=kind)


def _ranked(counts: Counter, limit: int) -> list[str]:
    def key(s):
        return (-counts[s], [ord(c) for c in s])

    return sorted((s for s in counts if s not in RESERVED), key=key)[:max(limit, 0)]


def build_char_vocab(corpus: Iterable[str], max_size: int) -> Vocabulary:
    """Most frequent characters first, ties by code point, capped at ``max_size`` entries.

    ``max_size`` counts the reserved symbols; the rest map to UNK.
    """
    counts: Counter = Counter()
    for line in corpus:
        counts.update(line)
    if not counts:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    return Vocabulary(list(RESERVED) + _ranked(counts, max_size - len(RESERVED)), kind="char")


def build_subword_vocab(corpus: Iterable[Sequence[str]], max_size: int | None = None) -> Vocabulary:
    counts: Counter = Counter()
    for tokens in corpus:
        counts.update(tokens)
    limit = len(counts) if max_size is None else max_size - len(RESERVED)
    return Vocabulary(list(RESERVED) + _ranked(counts, limit), kind="subword")
