"""Corpus BLEU: case-sensitive, whitespace tokens, n-grams up to 4, uniform weights.

Modified n-gram precisions are accumulated over the whole corpus, combined by
geometric mean and multiplied by the brevity penalty exp(1 - r/c) when the
hypothesis length c does not exceed the reference length r. With ``smooth1``
a higher-order precision (n > 1) whose match count is zero is replaced by
1 / (count + 1).
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

MAX_ORDER = 4


@dataclass
class BleuResult:
    score: float  # 0..100
    matches: list
    totals: list
    brevity_penalty: float
    hyp_length: int
    ref_length: int

    @property
    def precisions(self) -> list:
        return [m / t if t else 0.0 for m, t in zip(self.matches, self.totals)]

    def __str__(self) -> str:
        return f"{self.score:.2f}"


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(hypotheses: Sequence[str], references: Sequence[str], smooth1: bool = False, max_order: int = MAX_ORDER) -> BleuResult:
    if len(hypotheses) != len(references):
        raise ValueError(f"{len(hypotheses)} hypotheses but {len(references)} references")
    matches = [0] * max_order
    totals = [0] * max_order
    hyp_len = ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        h, r = hyp.split(), ref.split()
        hyp_len += len(h)
        ref_len += len(r)
        for n in range(1, max_order + 1):
            hc, rc = ngrams(h, n), ngrams(r, n)
            matches[n - 1] += sum(min(c, rc[g]) for g, c in hc.items())
            totals[n - 1] += max(len(h) - n + 1, 0)

    log_p = 0.0
    for n in range(max_order):
        m, t = matches[n], totals[n]
        if smooth1 and n > 0 and m == 0:
            m, t = 1, t + 1
        if m == 0 or t == 0:
            log_p = -math.inf
            break
        log_p += math.log(m / t) / max_order

    if hyp_len == 0:
        bp = 0.0
    elif hyp_len > ref_len:
        bp = 1.0
    else:
        bp = math.exp(1.0 - ref_len / hyp_len)
    score = 0.0 if log_p == -math.inf else 100.0 * bp * math.exp(log_p)
    return BleuResult(score, matches, totals, bp, hyp_len, ref_len)
