"""Parallel corpora: reading, length filtering and trimming for multilingual BPE."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

MAX_SOURCE_CHARS = 450
MAX_SOURCE_SUBWORDS = 50


@dataclass
class ParallelCorpus:
    """Aligned (source, target) sentences from one language pair."""

    sources: list = field(default_factory=list)
    targets: list = field(default_factory=list)
    tag: str = ""

    def __post_init__(self):
        if len(self.sources) != len(self.targets):
            raise ValueError(f"unaligned corpus {self.tag!r}: {len(self.sources)} sources vs {len(self.targets)} targets")

    def __len__(self) -> int:
        return len(self.sources)

    def pairs(self) -> list[tuple[str, str]]:
        return list(zip(self.sources, self.targets))

    @property
    def source_chars(self) -> int:
        return sum(len(s) for s in self.sources)

    @property
    def target_chars(self) -> int:
        return sum(len(t) for t in self.targets)


def read_lines(path: Union[str, Path]) -> list[str]:
    """UTF-8 text, one sentence per line, line terminators removed."""
    with open(path, encoding="utf-8", newline="") as f:
        text = f.read()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [ln[:-1] if ln.endswith("\r") else ln for ln in lines]


def write_lines(path: Union[str, Path], lines: Sequence[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("".join(line + "\n" for line in lines))


def read_parallel(source_path, target_path, tag: str = "", source_transform: Optional[Callable[[str], str]] = None) -> ParallelCorpus:
    src, tgt = read_lines(source_path), read_lines(target_path)
    if len(src) != len(tgt):
        raise ValueError(f"{source_path} has {len(src)} lines but {target_path} has {len(tgt)}")
    if source_transform is not None:
        src = [source_transform(s) for s in src]
    return ParallelCorpus(src, tgt, tag)


def filter_pairs(corpus: ParallelCorpus, max_source_chars: Optional[int] = MAX_SOURCE_CHARS,
                 max_source_subwords: Optional[int] = None, segment: Optional[Callable[[str], list]] = None) -> ParallelCorpus:
    """Keep pairs whose source is no longer than the limit, in their original order.

    With ``max_source_subwords`` set, length is counted in subwords produced by
    ``segment`` instead of characters.
    """
    if max_source_subwords is not None:
        if segment is None:
            raise ValueError("subword filtering needs a segment function")
        keep = [len(segment(s)) <= max_source_subwords for s in corpus.sources]
    else:
        keep = [len(s) <= max_source_chars for s in corpus.sources]
    return ParallelCorpus(
        [s for s, k in zip(corpus.sources, keep) if k],
        [t for t, k in zip(corpus.targets, keep) if k],
        corpus.tag,
    )


def trim_for_multilingual_bpe(corpora: Sequence[ParallelCorpus]) -> list[str]:
    """Source sentences of all corpora, each cut to roughly equal character counts.

    Every corpus keeps whole sentences in order until its running character
    count first reaches the smallest corpus total, so it overshoots that total
    by less than one sentence. The trimmed sources are concatenated.
    """
    if len(corpora) < 2:
        raise ValueError("need at least two corpora")
    budget = min(c.source_chars for c in corpora)
    combined: list[str] = []
    for c in corpora:
        total = 0
        for s in c.sources:
            if total >= budget:
                break
            combined.append(s)
            total += len(s)
    return combined


def trimmed_sizes(corpora: Sequence[ParallelCorpus]) -> list[int]:
    """Characters each corpus contributes to :func:`trim_for_multilingual_bpe`."""
    budget = min(c.source_chars for c in corpora)
    sizes = []
    for c in corpora:
        total = 0
        for s in c.sources:
            if total >= budget:
                break
            total += len(s)
        sizes.append(total)
    return sizes
