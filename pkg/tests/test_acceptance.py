"""Acceptance criteria 1-10, each at its stated tolerance.

Every test prints one ``PASS criterion N: ...`` or ``FAIL criterion N: ...``
line (also repeated in the pytest terminal summary). Criteria 3 and 4 train
toy models and take a few minutes each; run just this file with

    pytest tests/test_acceptance.py -v
"""
import contextlib
import time

import numpy as np

from char2char.bleu import corpus_bleu
from char2char.cli import gradcheck_batch, main
from char2char.data import ParallelCorpus, build_char_vocab, learn_bpe, make_batch, read_lines
from char2char.data.iso9 import TABLE, iso9_transliterate
from char2char.data.toy import generate
from char2char.infer import beam_search
from char2char.model import BPE_OPERATIONS, Char2Char, get_preset, load_checkpoint, save_checkpoint
from char2char.model.layers import embed_source, half_conv
from char2char.numerics import Tensor, check_gradients
from char2char.train import TrainConfig, clip_gradients, encode_pairs, global_norm, token_accuracy, train
from oracles import bpe_oracle, exhaustive, fixture_corpora

TOY_ALPHABET = "abcdefghij"


def cli(*argv):
    code = main([str(a) for a in argv])
    assert code == 0, f"char2char {' '.join(map(str, argv))} exited with {code}"


def test_criterion_1_gradient_check(verdict):
    start = time.perf_counter()
    config = get_preset("tiny")
    model = Char2Char.initialized(config, seed=0, init_range=0.5, dtype=np.float64)
    report = check_gradients(model, gradcheck_batch(config, seed=0), h=1e-4, tol=1e-3)
    elapsed = time.perf_counter() - start
    name, err = report.worst
    ok = report.passed and len(report.errors) == len(model.params) and elapsed < 60
    verdict(1, ok, f"{len(report.errors)} parameters, worst {name} rel err {err:.2e} (< 1e-3), {elapsed:.1f}s (< 60s)")


def test_criterion_2_shape_contracts(verdict):
    rng = np.random.default_rng(0)
    models = {s: Char2Char.initialized(get_preset("tiny").replace(pool_stride=s), seed=s) for s in (1, 2, 5)}
    good = 0
    for _ in range(1000):
        s = int(rng.choice([1, 2, 5]))
        length = int(rng.integers(1, 61))
        m = models[s]
        src = rng.integers(4, m.config.source_vocab_size, size=(1, length))
        bank = [(w, m.params[f"conv.{w}.W"], m.params[f"conv.{w}.b"]) for w, _ in m.config.filter_bank]
        conv_len = half_conv(embed_source(src, m.params["src_emb"]), bank).shape[1]
        segs, mask = m.segment_embeddings(src)
        good += conv_len == length and segs.shape[1] == int(mask.sum()) == -(-length // s)
    verdict(2, good == 1000, f"{good}/1000 trials with conv length T_x and ceil(T_x/s) segments")


def test_criterion_3_toy_reverse_end_to_end(tmp_path, verdict):
    start = time.perf_counter()
    cli("toygen", "--task", "reverse", "--n", 200, "--alphabet", TOY_ALPHABET, "--min-len", 5, "--max-len", 15,
        "--max-word", 5, "--seed", 0, "--out", tmp_path / "rev")
    src, tgt = tmp_path / "rev.src", tmp_path / "rev.tgt"
    ck = tmp_path / "rev.ckpt"
    cli("train", "--preset", "small", "--train", src, tgt, "--val", src, tgt, "--checkpoint", ck,
        "--metrics", tmp_path / "rev.tsv", "--lr", 3e-3, "--init-range", 0.1, "--batch-size", 32,
        "--max-updates", 5000, "--eval-every", 250, "--patience", 3, "--beam", 20)
    hyp = tmp_path / "rev.hyp"
    cli("translate", "--checkpoint", ck, "--input", src, "--out", hyp, "--beam", 20)
    bleu_out = tmp_path / "bleu.txt"
    with open(bleu_out, "w") as fh, contextlib.redirect_stdout(fh):
        cli("bleu", hyp, tgt)
    bleu = float(bleu_out.read_text().strip())

    model, sv, tv, _ = load_checkpoint(ck)
    sources, targets = read_lines(src), read_lines(tgt)
    acc = token_accuracy(model, encode_pairs(list(zip(sources, targets)), sv, tv))
    exact = sum(h == t for h, t in zip(read_lines(hyp), targets)) / len(targets)
    updates = sum(line.startswith("update\t") for line in read_lines(tmp_path / "rev.tsv"))
    elapsed = time.perf_counter() - start
    ok = updates <= 5000 and acc > 0.99 and exact >= 0.95 and bleu >= 90.0 and elapsed <= 1800
    verdict(3, ok, f"{updates} updates, token accuracy {acc:.4f} (> 0.99), exact {exact:.1%} (>= 95%), "
                   f"BLEU {bleu:.2f} (>= 90.00), {elapsed:.0f}s")


def test_criterion_4_multilingual_shared_model(verdict):
    start = time.perf_counter()
    a_letters, b_letters = TOY_ALPHABET, "klmnopqrst"
    copy = ParallelCorpus(*generate("copy", 100, alphabet=a_letters, seed=1), tag="copy-A")
    shift = ParallelCorpus(*generate("caesar", 100, alphabet=b_letters, seed=2, target_alphabet=a_letters), tag="caesar-B")
    sv = build_char_vocab(copy.sources + shift.sources, 32)
    tv = build_char_vocab(copy.targets + shift.targets, 32)
    model = Char2Char.initialized(get_preset("small").replace(source_vocab_size=32, target_vocab_size=32),
                                  seed=0, init_range=0.1)
    pa, pb = encode_pairs(copy.pairs(), sv, tv), encode_pairs(shift.pairs(), sv, tv)

    def converged(update, m):
        return update >= 1000 and update % 500 == 0 and min(token_accuracy(m, pa), token_accuracy(m, pb)) >= 0.95

    config = TrainConfig(learning_rate=3e-3, minibatch_size=4, quotas=(2, 2), init_range=0.1, max_updates=30000)
    result = train(model, [copy, shift], None, config, sv, tv, callback=converged)
    acc_a, acc_b = token_accuracy(model, pa), token_accuracy(model, pb)
    batches = sum(result.compositions.values())
    exact = result.compositions[(("caesar-B", 2), ("copy-A", 2))]
    elapsed = time.perf_counter() - start
    ok = min(acc_a, acc_b) >= 0.95 and batches >= 1000 and exact == batches and elapsed <= 1800
    verdict(4, ok, f"after {result.updates} updates token accuracy copy {acc_a:.4f}, caesar {acc_b:.4f} (>= 0.95); "
                   f"{exact}/{batches} batches exactly 2+2; {elapsed:.0f}s")


def test_criterion_5_bpe_oracle_and_constants(verdict):
    corpora = list(fixture_corpora())
    sizes = [sum(len(line.split()) for line in c) for c in corpora]
    same = sum(learn_bpe(c, 400).merges == bpe_oracle(c, 400) for c in corpora)
    ok = same == len(corpora) and max(sizes) <= 1000 and BPE_OPERATIONS == {"bilingual": 20_000, "multilingual": 50_000}
    verdict(5, ok, f"{same}/{len(corpora)} fixture corpora (<= {max(sizes)} words) merge-for-merge equal; "
                   f"ops {BPE_OPERATIONS['bilingual']}/{BPE_OPERATIONS['multilingual']}")


def test_criterion_6_iso9(verdict):
    golden = iso9_transliterate("школа") == "škola" and iso9_transliterate("школы") == "školy"
    values = list(TABLE.values())
    injective = len(set(values)) == len(values)
    verdict(6, golden and injective, f"goldens {'ok' if golden else 'wrong'}, {len(values)} letters, "
                                     f"{len(set(values))} distinct images")


def test_criterion_7_beam_optimality(verdict):
    # target vocab 7 = UNK, PAD, BOS (never emitted) + EOS + 3 letters, so |V| = 4
    config = get_preset("tiny").replace(target_vocab_size=7)
    max_len, width = 4, 4 ** 4
    rng = np.random.default_rng(0)
    same = 0
    for seed in range(20):
        model = Char2Char.initialized(config, seed=seed, init_range=1.0, dtype=np.float64)
        src = rng.integers(4, config.source_vocab_size, size=int(rng.integers(1, 7))).tolist()
        out = beam_search(model, src, width=width, max_len=max_len)
        score, seq = exhaustive(model, src, max_len)
        same += out.symbols == seq and abs(out.score - score) < 1e-12
    verdict(7, same == 20, f"{same}/20 random models match exhaustive search (|V|=4, max_len 4, width 256)")


def test_criterion_8_clipping(verdict):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        grads = {}
        for i in range(int(rng.integers(1, 6))):
            t = Tensor(np.zeros(1), requires_grad=True)
            t.grad = rng.normal(scale=10 ** rng.uniform(-3, 4), size=tuple(rng.integers(1, 6, size=rng.integers(1, 3))))
            grads[f"g{i}"] = t
        clip_gradients(grads, 1.0)
        worst = max(worst, global_norm(grads))
    verdict(8, worst <= 1.0 + 1e-9, f"largest post-clip norm over 100 sets {worst!r} (<= 1 + 1e-9)")


def test_criterion_9_determinism_and_persistence(tmp_path, verdict):
    cli("toygen", "--task", "reverse", "--n", 24, "--alphabet", "abcdef", "--min-len", 2, "--max-len", 7,
        "--out", tmp_path / "d")
    src, tgt = tmp_path / "d.src", tmp_path / "d.tgt"
    logs = []
    for run in ("a", "b"):
        cli("train", "--preset", "tiny", "--train", src, tgt, "--val", src, tgt, "--checkpoint", tmp_path / f"{run}.ckpt",
            "--metrics", tmp_path / f"{run}.tsv", "--batch-size", 4, "--max-updates", 20, "--eval-every", 10,
            "--beam", 3, "--lr", 1e-3, "--seed", 7)
        logs.append((tmp_path / f"{run}.tsv").read_bytes())
    same_logs = logs[0] == logs[1] and len(logs[0]) > 0

    model = Char2Char.initialized(get_preset("tiny"), seed=3, init_range=0.3)
    vocab = build_char_vocab(read_lines(src), 12)
    save_checkpoint(tmp_path / "m.ckpt", model, vocab, vocab)
    loaded, *_ = load_checkpoint(tmp_path / "m.ckpt")
    batch = make_batch(encode_pairs(list(zip(read_lines(src), read_lines(tgt)))[:6], vocab, vocab))
    same_forward = model.teacher_forced_logprobs(batch).data.tobytes() == loaded.teacher_forced_logprobs(batch).data.tobytes()
    verdict(9, same_logs and same_forward, f"metrics logs identical: {same_logs} ({len(logs[0])} bytes); "
                                           f"forward after reload identical: {same_forward}")


def test_criterion_10_bleu(verdict):
    lines = ["the cat sat on the mat", "a b c d e"]
    identity = f"{corpus_bleu(lines, lines).score:.2f}"
    smooth = corpus_bleu(["a b c d"], ["a b c e"], smooth1=True).score
    brevity = corpus_bleu(["the cat sat on the mat"], ["the cat sat on the mat today"]).score
    # hand values: 100 * (3/4 * 2/3 * 1/2 * 1/2) ** 0.25 and 100 * exp(1 - 7/6)
    ok = identity == "100.00" and abs(smooth - 59.46) <= 0.01 and abs(brevity - 84.65) <= 0.01
    verdict(10, ok, f"identity {identity}, smooth1 fixture {smooth:.2f} (59.46), brevity fixture {brevity:.2f} (84.65)")
