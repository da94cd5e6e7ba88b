"""Greedy and beam-search decoding."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .data.batching import make_source
from .data.vocab import BOS_ID, EOS_ID, PAD_ID, UNK_ID, Vocabulary

# never proposed during search
BANNED = (UNK_ID, PAD_ID, BOS_ID)
DEFAULT_BEAM = 20


def default_max_len(source_length: int) -> int:
    return 3 * source_length + 10


@dataclass
class BeamHypothesis:
    symbols: list = field(default_factory=list)  # emitted after BOS, EOS included once finished
    logprob: float = 0.0
    row: int = 0  # index into the batched decoder state
    finished: bool = False

    def __len__(self) -> int:
        return len(self.symbols)

    def score(self, normalize: bool = True) -> float:
        if not normalize:
            return self.logprob
        return self.logprob / max(len(self.symbols), 1)


@dataclass
class Translation:
    symbols: list
    score: float
    logprob: float
    truncated: bool = False
    text: Optional[str] = None
    error: Optional[str] = None

    @property
    def content(self) -> list:
        """Emitted symbols without the closing EOS."""
        return self.symbols[:-1] if self.symbols and self.symbols[-1] == EOS_ID else list(self.symbols)


def _prepare(model, source):
    src, mask = make_source([list(source)])
    enc = model.encode(src, mask)
    return enc, model.initial_state(enc)


def _step_logprobs(model, state, enc) -> tuple:
    new_state, logp = model.decode_step(state, enc)
    lp = logp.data.astype(np.float64)
    lp[:, list(BANNED)] = -np.inf
    return new_state, lp


def _finish(hyp: BeamHypothesis, truncated: bool, normalize: bool, vocab: Optional[Vocabulary]) -> Translation:
    t = Translation(list(hyp.symbols), hyp.score(normalize), hyp.logprob, truncated)
    if vocab is not None:
        t.text = vocab.decode(t.content)
    return t


def greedy_decode(model, source: Sequence[int], max_len: Optional[int] = None,
                  target_vocab: Optional[Vocabulary] = None, normalize: bool = True) -> Translation:
    """Most probable symbol at every step until EOS or ``max_len`` symbols."""
    if max_len is None:
        max_len = default_max_len(len(source))
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    enc, state = _prepare(model, source)
    hyp = BeamHypothesis()
    for _ in range(max_len):
        state, lp = _step_logprobs(model, state, enc)
        sym = int(np.argmax(lp[0]))  # first index on ties
        hyp.symbols.append(sym)
        hyp.logprob += float(lp[0, sym])
        if sym == EOS_ID:
            hyp.finished = True
            break
        state = state.feed([sym])
    return _finish(hyp, not hyp.finished, normalize, target_vocab)


def beam_search(model, source: Sequence[int], width: int = DEFAULT_BEAM, max_len: Optional[int] = None,
                target_vocab: Optional[Vocabulary] = None, normalize: bool = True) -> Translation:
    """Beam search over target symbols with length-normalized final ranking.

    Every live hypothesis is expanded over the whole vocabulary and the best
    ``width - finished`` candidates by cumulative log-probability survive;
    ties go to the earlier hypothesis, then the lower symbol index. Candidates
    ending in EOS move to the finished pool. Search stops once ``width``
    hypotheses have finished, none are live, or ``max_len`` symbols have been
    emitted. Finished hypotheses are ranked by log-probability divided by
    length (EOS counted); if none finished, the best live one is returned
    with ``truncated`` set.
    """
    if width < 1:
        raise ValueError("beam width must be >= 1")
    if max_len is None:
        max_len = default_max_len(len(source))
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    enc1, state = _prepare(model, source)
    live = [BeamHypothesis()]
    finished: list[BeamHypothesis] = []
    encs = {1: enc1}
    for _ in range(max_len):
        n = len(live)
        if n not in encs:
            encs[n] = enc1.repeat(n)
        state, lp = _step_logprobs(model, state, encs[n])
        cand = np.array([h.logprob for h in live])[:, None] + lp
        flat = cand.ravel()
        order = np.argsort(-flat, kind="stable")
        room = width - len(finished)
        keep_rows, keep_syms, survivors = [], [], []
        for k in order[:room]:
            if not np.isfinite(flat[k]):
                break
            row, sym = divmod(int(k), lp.shape[1])
            h = BeamHypothesis(live[row].symbols + [sym], float(flat[k]), row)
            if sym == EOS_ID:
                h.finished = True
                finished.append(h)
            else:
                h.row = len(survivors)
                survivors.append(h)
                keep_rows.append(row)
                keep_syms.append(sym)
        live = survivors
        if len(finished) >= width or not live:
            break
        state = state.select(keep_rows).feed(keep_syms)
    if finished:
        best = max(finished, key=lambda h: h.score(normalize))  # max keeps the first of equals
        return _finish(best, False, normalize, target_vocab)
    best = max(live, key=lambda h: h.score(normalize))
    return _finish(best, True, normalize, target_vocab)


def translate_batch(model, sources: Sequence[Sequence[int]], width: int = DEFAULT_BEAM, max_len: Optional[int] = None,
                    target_vocab: Optional[Vocabulary] = None, workers: int = 1) -> list[Translation]:
    """Decode each source independently; results follow input order.

    A failure on one sentence is reported in that entry's ``error`` and the
    rest of the batch continues.
    """
    def one(src):
        try:
            return beam_search(model, src, width, max_len, target_vocab)
        except Exception as exc:  # per-line reporting
            return Translation([], float("-inf"), float("-inf"), text="" if target_vocab else None, error=f"{type(exc).__name__}: {exc}")

    if workers <= 1:
        return [one(s) for s in sources]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, sources))
