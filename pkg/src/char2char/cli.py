"""Command-line interface.

Subcommands: train, translate, bpe (learn | apply), bleu, translit, toygen,
gradcheck. Exit codes: 0 success, 1 check failure, 2 usage or config error,
3 numeric failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .bleu import corpus_bleu
from .data import (
    MergeFileError, MergeTable, ParallelCorpus, Vocabulary, apply_bpe, build_char_vocab, build_subword_vocab,
    iso9_transliterate, learn_bpe, make_batch, read_lines, read_parallel, write_lines,
)
from .data.toy import TASKS, generate
from .model import ConfigError, ModelConfig, PRESETS, get_preset, load_config
from .model.config import BPE_OPERATIONS, dumps
from .model.network import Char2Char, count_parameters
from .numerics import check_gradients, inject_backward_fault

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    """Bad flags, missing files or inconsistent configuration (exit 2)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _open_in(path: Optional[str]):
    if path in (None, "-"):
        return sys.stdin
    if not Path(path).is_file():
        raise UsageError(f"no such file: {path}")
    return open(path, encoding="utf-8", newline="")


def _read(path: Optional[str]) -> list[str]:
    if path in (None, "-"):
        return [line.rstrip("\r\n") for line in sys.stdin]
    if not Path(path).is_file():
        raise UsageError(f"no such file: {path}")
    return read_lines(path)


def _write(path: Optional[str], lines: Sequence[str]) -> None:
    if path in (None, "-"):
        sys.stdout.write("".join(line + "\n" for line in lines))
        sys.stdout.flush()
    else:
        write_lines(path, lines)


def _model_config(args) -> Optional[ModelConfig]:
    if getattr(args, "config", None):
        if not Path(args.config).is_file():
            raise UsageError(f"no such file: {args.config}")
        return load_config(args.config)
    if getattr(args, "preset", None):
        return get_preset(args.preset)
    return None


# ------------------------------------------------------------------ train

def cmd_train(args) -> int:
    from .train import NonFiniteLossError, TrainConfig, train

    config = _model_config(args) or get_preset("bilingual-char")
    tcfg = TrainConfig(
        learning_rate=args.lr, minibatch_size=args.batch_size, clip_threshold=args.clip, init_range=args.init_range,
        patience=args.patience, seed=args.seed, eval_every=args.eval_every, max_updates=args.max_updates,
        beam_width=args.beam, max_len=args.max_len, quotas=tuple(args.quotas) if args.quotas else None,
    )
    if args.dry_run:
        print(dumps(config), end="")
        print(f"# parameters = {count_parameters(config)}")
        return EXIT_OK

    if not args.train:
        raise UsageError("train needs at least one --train SRC TGT pair")
    paths = [p for pair in args.train for p in pair]
    if args.val:
        paths += args.val
    if args.merges:
        paths.append(args.merges)
    missing = [p for p in paths if not Path(p).is_file()]
    if missing:
        raise UsageError(f"no such file: {', '.join(missing)}")
    if tcfg.quotas and len(tcfg.quotas) != len(args.train):
        raise UsageError(f"{len(args.train)} training pairs but {len(tcfg.quotas)} quotas")
    if (config.source_kind == "bpe") != bool(args.merges):
        raise UsageError("a bpe source encoder needs --merges, a character encoder must not have it")
    if not args.checkpoint:
        raise UsageError("train needs --checkpoint")

    transform = iso9_transliterate if args.translit else None
    corpora = [read_parallel(s, t, tag=f"pair{i}", source_transform=transform) for i, (s, t) in enumerate(args.train)]
    val = read_parallel(args.val[0], args.val[1], "val", transform) if args.val else None
    merges = None
    if args.merges:
        merges = MergeTable.load(args.merges)
        seg = lambda s: " ".join(apply_bpe(s, merges))  # noqa: E731
        corpora = [ParallelCorpus([seg(s) for s in c.sources], c.targets, c.tag) for c in corpora]
        if val is not None:
            val = ParallelCorpus([seg(s) for s in val.sources], val.targets, val.tag)
        src_vocab = build_subword_vocab([s.split() for c in corpora for s in c.sources], config.source_vocab_size)
    else:
        src_vocab = build_char_vocab([s for c in corpora for s in c.sources], config.source_vocab_size)
    tgt_vocab = build_char_vocab([t for c in corpora for t in c.targets], config.target_vocab_size)

    model = Char2Char.initialized(config, seed=tcfg.seed, init_range=tcfg.init_range)
    try:
        result = train(model, corpora, val, tcfg, src_vocab, tgt_vocab, metrics=args.metrics,
                       checkpoint=args.checkpoint, merges=list(merges) if merges else None)
    except NonFiniteLossError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.val_out and result.val_outputs:
        write_lines(args.val_out, result.val_outputs)
    msg = f"stopped after {result.updates} updates ({result.stop_reason})"
    if result.best_bleu is not None:
        msg += f"; best validation BLEU {result.best_bleu:.2f} at update {result.best_update}"
    print(msg, file=sys.stderr)
    return EXIT_OK


# -------------------------------------------------------------- translate

def cmd_translate(args) -> int:
    from .infer import translate_batch
    from .model.checkpoint import CheckpointError, load_checkpoint
    from .train import encode_source

    if not args.checkpoint or not Path(args.checkpoint).is_file():
        raise UsageError(f"no such checkpoint: {args.checkpoint}")
    try:
        model, src_vocab, tgt_vocab, merges = load_checkpoint(args.checkpoint, _model_config(args))
    except CheckpointError as exc:
        raise UsageError(str(exc)) from None
    except ValueError as exc:
        raise UsageError(f"checkpoint does not match the configuration: {exc}") from None
    lines = _read(args.input)
    if args.translit:
        lines = [iso9_transliterate(s) for s in lines]
    if merges:
        lines = [" ".join(apply_bpe(s, merges)) for s in lines]
    sources = [encode_source(src_vocab, s) for s in lines]
    results = translate_batch(model, sources, args.beam, args.max_len, tgt_vocab, workers=args.workers)
    failed = 0
    for i, r in enumerate(results, 1):
        if r.error:
            failed += 1
            print(f"line {i}: {r.error}", file=sys.stderr)
    _write(args.out, [r.text for r in results])
    return EXIT_CHECK if failed else EXIT_OK


# -------------------------------------------------------------------- bpe

def cmd_bpe(args) -> int:
    if args.action == "learn":
        ops = args.num_ops or BPE_OPERATIONS["multilingual" if args.multilingual else "bilingual"]
        table = learn_bpe(_read(args.input), ops)
        if args.out in (None, "-"):
            sys.stdout.write("#bpe-merges v1\n" + "".join(f"{a} {b}\n" for a, b in table))
        else:
            table.save(args.out)
        print(f"learned {len(table)} merges (requested {ops})", file=sys.stderr)
        return EXIT_OK
    if not args.merges:
        raise UsageError("bpe apply needs --merges")
    if not Path(args.merges).is_file():
        raise UsageError(f"no such file: {args.merges}")
    try:
        table = MergeTable.load(args.merges)
    except MergeFileError as exc:
        raise UsageError(f"{args.merges}: {exc}") from None
    _write(args.out, [" ".join(apply_bpe(line, table)) for line in _read(args.input)])
    return EXIT_OK


# ------------------------------------------------------------------- bleu

def cmd_bleu(args) -> int:
    hyps, refs = _read(args.hyp), _read(args.ref)
    if len(hyps) != len(refs):
        raise UsageError(f"{args.hyp} has {len(hyps)} lines but {args.ref} has {len(refs)}")
    print(f"{corpus_bleu(hyps, refs, smooth1=args.smooth1).score:.2f}")
    return EXIT_OK


# --------------------------------------------------------------- translit

def cmd_translit(args) -> int:
    src = _open_in(args.input)
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w", encoding="utf-8", newline="")
    try:
        for line in src:
            out.write(iso9_transliterate(line))
    finally:
        if src is not sys.stdin:
            src.close()
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


# ----------------------------------------------------------------- toygen

def cmd_toygen(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    if args.min_len < 1 or args.max_len < args.min_len:
        raise UsageError("need 1 <= --min-len <= --max-len")
    src, tgt = generate(args.task, args.n, args.alphabet, args.seed, args.min_len, args.max_len,
                        args.max_word, args.shift, args.target_alphabet)
    stem = f"{args.out}.{args.pair_tag}" if args.pair_tag else args.out
    write_lines(f"{stem}.src", src)
    write_lines(f"{stem}.tgt", tgt)
    print(f"wrote {len(src)} pairs to {stem}.src / {stem}.tgt", file=sys.stderr)
    return EXIT_OK


# -------------------------------------------------------------- gradcheck

def gradcheck_batch(config: ModelConfig, seed: int, size: int = 2):
    """A small random batch with unequal lengths, so masking is exercised."""
    rng = np.random.default_rng(seed)
    pairs = []
    for n in range(size):
        s = rng.integers(4, config.source_vocab_size, size=3 + 2 * n).tolist()
        t = rng.integers(4, config.target_vocab_size, size=2 + n).tolist()
        pairs.append((s, t))
    return make_batch(pairs)


def cmd_gradcheck(args) -> int:
    config = _model_config(args) or get_preset("tiny")
    model = Char2Char.initialized(config, seed=args.seed, init_range=0.5, dtype=np.float64)
    batch = gradcheck_batch(config, args.seed)
    if args.inject_fault:
        with inject_backward_fault(args.inject_fault, 0.5):
            report = check_gradients(model, batch, h=args.h, tol=args.tol)
    else:
        report = check_gradients(model, batch, h=args.h, tol=args.tol)
    print(report.format())
    if not report.passed:
        for name, err in report.failures.items():
            print(f"gradient check failed: {name} relative error {err:.3e}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="char2char", description="Character-level neural machine translation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def model_flags(sp, default_preset=None):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--preset", choices=sorted(PRESETS), default=default_preset)
        g.add_argument("--config", help="key = value model config file")

    t = sub.add_parser("train", help="train a model")
    model_flags(t)
    t.add_argument("--train", nargs=2, action="append", metavar=("SRC", "TGT"),
                   help="parallel corpus; repeat for multilingual balanced batches")
    t.add_argument("--val", nargs=2, metavar=("SRC", "TGT"))
    t.add_argument("--merges", help="BPE merge file for a bpe source encoder")
    t.add_argument("--translit", action="store_true", help="ISO-9 transliterate Cyrillic sources")
    t.add_argument("--checkpoint")
    t.add_argument("--metrics", help="metrics log path")
    t.add_argument("--val-out", help="write the best validation decodes here")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--lr", type=float, default=1e-4)
    t.add_argument("--batch-size", type=int, default=64)
    t.add_argument("--quotas", type=int, nargs="+", help="per-corpus minibatch counts")
    t.add_argument("--clip", type=float, default=1.0)
    t.add_argument("--init-range", type=float, default=0.01)
    t.add_argument("--patience", type=int, default=5)
    t.add_argument("--eval-every", type=int, default=500)
    t.add_argument("--max-updates", type=int, default=100_000)
    t.add_argument("--beam", type=int, default=20)
    t.add_argument("--max-len", type=int)
    t.add_argument("--dry-run", action="store_true", help="print the resolved config and exit")
    t.set_defaults(func=cmd_train)

    tr = sub.add_parser("translate", help="decode sentences with a checkpoint")
    model_flags(tr)
    tr.add_argument("--checkpoint", required=True)
    tr.add_argument("--input", help="default stdin")
    tr.add_argument("--out", help="default stdout")
    tr.add_argument("--beam", type=int, default=20)
    tr.add_argument("--max-len", type=int)
    tr.add_argument("--workers", type=int, default=1)
    tr.add_argument("--translit", action="store_true")
    tr.set_defaults(func=cmd_translate)

    b = sub.add_parser("bpe", help="learn or apply BPE merges")
    b.add_argument("action", choices=["learn", "apply"])
    b.add_argument("--input")
    b.add_argument("--out")
    b.add_argument("--merges")
    b.add_argument("--num-ops", type=int)
    b.add_argument("--multilingual", action="store_true", help="default to the multilingual merge count")
    b.set_defaults(func=cmd_bpe)

    bl = sub.add_parser("bleu", help="corpus BLEU of a hypothesis file")
    bl.add_argument("hyp")
    bl.add_argument("ref")
    bl.add_argument("--smooth1", action="store_true")
    bl.set_defaults(func=cmd_bleu)

    tl = sub.add_parser("translit", help="ISO-9 Cyrillic to Latin")
    tl.add_argument("--input")
    tl.add_argument("--out")
    tl.set_defaults(func=cmd_translit)

    tg = sub.add_parser("toygen", help="write a synthetic parallel corpus")
    tg.add_argument("--task", choices=TASKS, required=True)
    tg.add_argument("--n", type=int, default=200)
    tg.add_argument("--alphabet", default="abcdefghij")
    tg.add_argument("--target-alphabet", help="caesar output alphabet")
    tg.add_argument("--shift", type=int, default=1)
    tg.add_argument("--seed", type=int, default=0)
    tg.add_argument("--min-len", type=int, default=5)
    tg.add_argument("--max-len", type=int, default=15)
    tg.add_argument("--max-word", type=int, default=0, help="split lines into words of at most this length")
    tg.add_argument("--out", required=True, help="output prefix; writes PREFIX.src and PREFIX.tgt")
    tg.add_argument("--pair-tag", help="insert a language-pair tag into the file names")
    tg.set_defaults(func=cmd_toygen)

    gc = sub.add_parser("gradcheck", help="finite-difference gradient check")
    model_flags(gc, default_preset="tiny")
    gc.add_argument("--seed", type=int, default=0)
    gc.add_argument("--h", type=float, default=1e-4)
    gc.add_argument("--tol", type=float, default=1e-3)
    gc.add_argument("--inject-fault", metavar="OP", help="scale the backward of one op (checker self-test)")
    gc.set_defaults(func=cmd_gradcheck)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, MergeFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FloatingPointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
