"""Synthetic parallel corpora for desk-scale experiments."""
from __future__ import annotations

import string
from typing import Optional

import numpy as np

TASKS = ("copy", "reverse", "caesar")


def caesar(text: str, alphabet: str, shift: int = 1, target_alphabet: Optional[str] = None) -> str:
    """Rotate letters of ``alphabet`` by ``shift``, writing them in ``target_alphabet``.

    Characters outside ``alphabet`` pass through.
    """
    target = alphabet if target_alphabet is None else target_alphabet
    if len(target) != len(alphabet):
        raise ValueError("target alphabet must have the same size")
    pos = {c: i for i, c in enumerate(alphabet)}
    n = len(alphabet)
    return "".join(target[(pos[c] + shift) % n] if c in pos else c for c in text)


def apply_task(task: str, text: str, alphabet: str, shift: int = 1, target_alphabet: Optional[str] = None) -> str:
    if task == "copy":
        return text
    if task == "reverse":
        return text[::-1]
    if task == "caesar":
        return caesar(text, alphabet, shift, target_alphabet)
    raise ValueError(f"unknown task {task!r}; choose from {', '.join(TASKS)}")


def random_sentence(rng: np.random.Generator, alphabet: str, min_len: int, max_len: int, max_word: int = 0) -> str:
    """A line of ``min_len``..``max_len`` characters.

    With ``max_word`` > 0 the line is split into words of at most ``max_word``
    letters by single spaces; spaces count toward the length.
    """
    length = int(rng.integers(min_len, max_len + 1))
    if max_word <= 0:
        return "".join(alphabet[i] for i in rng.integers(0, len(alphabet), size=length))
    words: list[int] = []
    left = length
    while left > max_word:
        top = min(max_word, left - 2)  # leave a space and at least one letter
        if top < 1:  # max_word == 1 with two slots left: end the line one short
            left = 1
            break
        w = int(rng.integers(1, top + 1))
        words.append(w)
        left -= w + 1
    words.append(left)
    pick = lambda n: "".join(alphabet[i] for i in rng.integers(0, len(alphabet), size=n))  # noqa: E731
    return " ".join(pick(w) for w in words)


def generate(task: str, n: int, alphabet: str = string.ascii_lowercase[:10], seed: int = 0,
             min_len: int = 5, max_len: int = 15, max_word: int = 0, shift: int = 1,
             target_alphabet: Optional[str] = None) -> tuple[list[str], list[str]]:
    """``n`` random sources and their images under ``task``; deterministic in ``seed``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}; choose from {', '.join(TASKS)}")
    rng = np.random.default_rng(seed)
    sources = [random_sentence(rng, alphabet, min_len, max_len, max_word) for _ in range(n)]
    targets = [apply_task(task, s, alphabet, shift, target_alphabet) for s in sources]
    return sources, targets
