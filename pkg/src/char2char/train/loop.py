"""Training loop with periodic beam-search validation and patience-based stopping.

The metrics log is tab-separated text, one record per line:

    update  <n>  <loss>  <grad_norm>  <clip_factor>
    eval    <n>  <val_bleu>

Floats are written with ``repr`` so two runs can be compared byte for byte.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, TextIO, Union

import numpy as np

from ..bleu import corpus_bleu
from ..data.batching import make_batch
from ..data.corpus import ParallelCorpus
from ..data.schedule import Minibatch, ScheduleSpec, balanced_minibatch, shuffled_minibatches
from ..data.vocab import Vocabulary
from ..infer import translate_batch
from ..model.checkpoint import save_checkpoint
from ..model.network import Char2Char
from ..numerics import Tape
from .optim import Adam, clip_gradients, zero_grad


class NonFiniteLossError(FloatingPointError):
    pass


@dataclass
class TrainConfig:
    learning_rate: float = 1e-4
    minibatch_size: int = 64
    clip_threshold: float = 1.0
    init_range: float = 0.01
    patience: int = 5
    seed: int = 0
    eval_every: int = 500
    max_updates: int = 100_000
    beam_width: int = 20
    max_len: Optional[int] = None  # decoding cap for validation; None = 3*source+10
    quotas: Optional[tuple] = None  # per-corpus minibatch counts; None = proportional to corpus size

    def __post_init__(self):
        for name in ("learning_rate", "minibatch_size", "clip_threshold", "init_range", "eval_every",
                     "max_updates", "beam_width"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.patience < 0:
            raise ValueError("patience must be >= 0")


@dataclass
class TrainResult:
    updates: int
    stop_reason: str  # "max_updates" | "patience" | "callback"
    best_bleu: Optional[float] = None
    best_update: Optional[int] = None
    val_outputs: list = field(default_factory=list)  # decodes at the best evaluation
    losses: list = field(default_factory=list)
    compositions: Counter = field(default_factory=Counter)  # sorted (tag, count) tuples -> batches


def encode_source(vocab: Vocabulary, text: str) -> list[int]:
    """Characters for a char vocabulary, whitespace tokens for a subword one."""
    return vocab.encode(text if vocab.kind == "char" else text.split())


def encode_pairs(pairs, source_vocab: Vocabulary, target_vocab: Vocabulary) -> list[tuple]:
    return [(encode_source(source_vocab, s), target_vocab.encode(t)) for s, t in pairs]


def token_accuracy(model: Char2Char, pairs: Sequence[tuple], batch_size: int = 64) -> float:
    """Teacher-forced fraction of target positions (EOS included) whose argmax is correct."""
    hit = total = 0
    for i in range(0, len(pairs), batch_size):
        b = make_batch(pairs[i:i + batch_size])
        pred = model.teacher_forced_logprobs(b).data.argmax(-1)
        hit += int(((pred == b.tgt_out) & b.tgt_mask).sum())
        total += int(b.tgt_mask.sum())
    return hit / total if total else 0.0


def _stream(corpora: Sequence[ParallelCorpus], cfg: TrainConfig):
    if len(corpora) == 1:
        return shuffled_minibatches(corpora[0], cfg.minibatch_size, cfg.seed + 1)
    spec = ScheduleSpec(cfg.quotas) if cfg.quotas else ScheduleSpec.proportional(
        [len(c) for c in corpora], cfg.minibatch_size)
    return balanced_minibatch(corpora, spec, cfg.seed + 1)


def _describe(mb: Minibatch) -> str:
    first = mb.pairs[0][0] if mb.pairs else ""
    return f"{len(mb.pairs)} pairs from {sorted(set(mb.tags))}, first source {first[:40]!r}"


def train(model: Char2Char, corpora: Union[ParallelCorpus, Sequence[ParallelCorpus]], val_set: Optional[ParallelCorpus],
          config: TrainConfig, source_vocab: Vocabulary, target_vocab: Vocabulary,
          metrics: Optional[Union[str, Path, TextIO]] = None, checkpoint: Optional[Union[str, Path]] = None,
          callback: Optional[Callable[[int, Char2Char], bool]] = None, merges=None) -> TrainResult:
    """Update ``model`` in place until ``max_updates``, patience runs out or ``callback`` returns True.

    With several corpora every minibatch follows the balanced schedule. When a
    validation set is given it is decoded every ``eval_every`` updates; the
    best-BLEU parameters are written to ``checkpoint`` and restored into
    ``model`` at the end.
    """
    if isinstance(corpora, ParallelCorpus):
        corpora = [corpora]
    if not corpora or any(len(c) == 0 for c in corpora):
        raise ValueError("training data is empty")
    own_log = isinstance(metrics, (str, Path))
    log = open(metrics, "w", encoding="utf-8", newline="\n") if own_log else metrics
    params = model.parameters()
    opt = Adam(lr=config.learning_rate)
    stream = _stream(corpora, config)
    val_src = [encode_source(source_vocab, s) for s in val_set.sources] if val_set is not None else []

    result = TrainResult(0, "max_updates")
    best_params = None
    bad_evals = 0
    try:
        for update in range(1, config.max_updates + 1):
            mb = next(stream)
            result.compositions[tuple(sorted(Counter(mb.tags).items()))] += 1
            batch = make_batch(encode_pairs(mb.pairs, source_vocab, target_vocab))
            zero_grad(params)
            with Tape() as tape:
                loss = model.loss(batch)
            value = float(loss.data)
            if not math.isfinite(value):
                raise NonFiniteLossError(f"non-finite loss {value} at update {update} on batch of {_describe(mb)}")
            tape.backward(loss)
            norm = float(np.sqrt(sum(float(np.vdot(p.grad, p.grad)) for p in params.values() if p.grad is not None)))
            factor = clip_gradients(params, config.clip_threshold)
            opt.step(params)
            result.updates = update
            result.losses.append(value)
            if log:
                log.write(f"update\t{update}\t{value!r}\t{norm!r}\t{factor!r}\n")

            if val_set is not None and update % config.eval_every == 0:
                outs = translate_batch(model, val_src, config.beam_width, config.max_len, target_vocab)
                hyps = [t.text for t in outs]
                bleu = corpus_bleu(hyps, val_set.targets).score
                if log:
                    log.write(f"eval\t{update}\t{bleu!r}\n")
                if result.best_bleu is None or bleu > result.best_bleu:
                    result.best_bleu, result.best_update, result.val_outputs = bleu, update, hyps
                    best_params = {k: v.data.copy() for k, v in params.items()}
                    bad_evals = 0
                    if checkpoint:
                        save_checkpoint(checkpoint, model, source_vocab, target_vocab, merges)
                else:
                    bad_evals += 1
                    if bad_evals > config.patience:
                        result.stop_reason = "patience"
                        break
            if callback is not None and callback(update, model):
                result.stop_reason = "callback"
                break
    finally:
        if own_log:
            log.close()
    if best_params is not None:
        for k, v in best_params.items():
            params[k].data[...] = v
    elif checkpoint:
        save_checkpoint(checkpoint, model, source_vocab, target_vocab, merges)
    return result
