import subprocess
import sys

import pytest

from char2char.cli import main
from char2char.data import read_lines, write_lines
from char2char.data.bpe import detokenize


def run(argv, capsys=None):
    code = main([str(a) for a in argv])
    out = capsys.readouterr() if capsys else None
    return code, out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "char2char", "bleu", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "--smooth1" in proc.stdout


def test_no_subcommand_is_usage_error(capsys):
    assert run([], capsys)[0] == 2


# ------------------------------------------------------------------ train presets

def test_train_dry_run_bilingual(capsys):
    code, out = run(["train", "--preset", "bilingual-char", "--dry-run"], capsys)
    assert code == 0
    assert "filter_bank = 1:200,2:200,3:250,4:250,5:300,6:300,7:300,8:300" in out.out
    assert "pool_stride = 5" in out.out and "highway_layers = 4" in out.out


def test_train_dry_run_multilingual(capsys):
    code, out = run(["train", "--preset", "multilingual-char", "--dry-run"], capsys)
    assert code == 0
    assert "filter_bank = 1:200,2:250,3:300,4:300,5:400,6:400,7:400,8:400" in out.out


def test_train_missing_corpus_writes_nothing(tmp_path, capsys):
    ck, log = tmp_path / "m.ckpt", tmp_path / "m.tsv"
    code, out = run(["train", "--preset", "tiny", "--train", tmp_path / "nope.src", tmp_path / "nope.tgt",
                     "--checkpoint", ck, "--metrics", log], capsys)
    assert code == 2 and "no such file" in out.err
    assert list(tmp_path.iterdir()) == []


def test_train_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("filter_bank = 2:3\n")
    assert run(["train", "--config", cfg, "--dry-run"], capsys)[0] == 2


def toy_files(tmp_path, capsys, n=16, task="reverse", tag=None, seed=0):
    argv = ["toygen", "--task", task, "--n", n, "--alphabet", "abcdef", "--min-len", 2, "--max-len", 6,
            "--seed", seed, "--out", tmp_path / "toy"]
    if tag:
        argv += ["--pair-tag", tag]
    assert run(argv, capsys)[0] == 0
    stem = tmp_path / (f"toy.{tag}" if tag else "toy")
    return f"{stem}.src", f"{stem}.tgt"


def test_train_translate_roundtrip(tmp_path, capsys):
    src, tgt = toy_files(tmp_path, capsys)
    ck, log, val_out = tmp_path / "m.ckpt", tmp_path / "m.tsv", tmp_path / "val.txt"
    code, _ = run(["train", "--preset", "tiny", "--train", src, tgt, "--val", src, tgt, "--checkpoint", ck,
                   "--metrics", log, "--val-out", val_out, "--batch-size", 4, "--max-updates", 6, "--eval-every", 3,
                   "--beam", 3, "--lr", 1e-3], capsys)
    assert code == 0 and ck.exists()
    assert sum(line.startswith("update\t") for line in read_lines(log)) == 6
    out = tmp_path / "hyp.txt"
    code, _ = run(["translate", "--checkpoint", ck, "--input", src, "--out", out, "--beam", 3], capsys)
    assert code == 0
    assert read_lines(out) == read_lines(val_out)


def test_translate_beam1_equals_greedy(tmp_path, capsys):
    from char2char.infer import greedy_decode
    from char2char.model import load_checkpoint
    from char2char.train import encode_source

    src, tgt = toy_files(tmp_path, capsys, n=8)
    ck = tmp_path / "m.ckpt"
    assert run(["train", "--preset", "tiny", "--train", src, tgt, "--checkpoint", ck, "--batch-size", 4,
                "--max-updates", 3], capsys)[0] == 0
    out = tmp_path / "hyp.txt"
    assert run(["translate", "--checkpoint", ck, "--input", src, "--out", out, "--beam", 1, "--max-len", 8], capsys)[0] == 0
    model, sv, tv, _ = load_checkpoint(ck)
    expect = [greedy_decode(model, encode_source(sv, s), 8, tv).text for s in read_lines(src)]
    assert read_lines(out) == expect


def test_translate_config_mismatch_names_shapes(tmp_path, capsys):
    src, tgt = toy_files(tmp_path, capsys, n=4)
    ck = tmp_path / "m.ckpt"
    assert run(["train", "--preset", "tiny", "--train", src, tgt, "--checkpoint", ck, "--batch-size", 2,
                "--max-updates", 1], capsys)[0] == 0
    cfg = tmp_path / "other.cfg"
    from char2char.model import get_preset, save_config
    save_config(get_preset("tiny").replace(encoder_hidden=6), cfg)
    code, out = run(["translate", "--checkpoint", ck, "--config", cfg, "--input", src], capsys)
    assert code == 2 and "enc.fwd.U_h: expected (6, 6), got (5, 5)" in out.err


def test_translate_missing_checkpoint(tmp_path, capsys):
    assert run(["translate", "--checkpoint", tmp_path / "none"], capsys)[0] == 2


def test_train_multilingual_with_quotas(tmp_path, capsys):
    a = toy_files(tmp_path, capsys, n=6, task="copy", tag="aa")
    b = toy_files(tmp_path, capsys, n=6, task="caesar", tag="bb", seed=1)
    ck = tmp_path / "m.ckpt"
    code, _ = run(["train", "--preset", "tiny", "--train", *a, "--train", *b, "--quotas", 2, 2,
                   "--checkpoint", ck, "--max-updates", 2], capsys)
    assert code == 0 and ck.exists()
    assert run(["train", "--preset", "tiny", "--train", *a, "--quotas", 2, 2, "--checkpoint", ck], capsys)[0] == 2


def test_train_non_finite_loss_exit_3(tmp_path, capsys, monkeypatch):
    import numpy as np

    from char2char.model import Char2Char

    src, tgt = toy_files(tmp_path, capsys, n=4)
    real = Char2Char.loss
    monkeypatch.setattr(Char2Char, "loss", lambda self, batch: real(self, batch) * np.nan)
    code, out = run(["train", "--preset", "tiny", "--train", src, tgt, "--checkpoint", tmp_path / "m.ckpt",
                     "--max-updates", 3], capsys)
    assert code == 3 and "non-finite loss nan at update 1" in out.err


# ------------------------------------------------------------------ bpe

def test_bpe_learn_apply_lossless(tmp_path, capsys):
    corpus = ["low lower lowest newer newest", "wider widest low new"] * 3
    write_lines(tmp_path / "c.txt", corpus)
    assert run(["bpe", "learn", "--input", tmp_path / "c.txt", "--out", tmp_path / "m", "--num-ops", 50], capsys)[0] == 0
    assert run(["bpe", "apply", "--merges", tmp_path / "m", "--input", tmp_path / "c.txt",
                "--out", tmp_path / "o.txt"], capsys)[0] == 0
    applied = read_lines(tmp_path / "o.txt")
    assert all(line.split()[-1].endswith("</w>") for line in applied)
    assert [detokenize(line.split()) for line in applied] == corpus


def test_bpe_default_op_counts(tmp_path, capsys):
    write_lines(tmp_path / "c.txt", ["aa bb"])
    _, out = run(["bpe", "learn", "--input", tmp_path / "c.txt", "--out", tmp_path / "m"], capsys)
    assert "requested 20000" in out.err
    _, out = run(["bpe", "learn", "--input", tmp_path / "c.txt", "--out", tmp_path / "m", "--multilingual"], capsys)
    assert "requested 50000" in out.err


def test_bpe_malformed_merges(tmp_path, capsys):
    (tmp_path / "m").write_text("#bpe-merges v1\na b\nthree parts here\n", encoding="utf-8")
    write_lines(tmp_path / "c.txt", ["ab"])
    code, out = run(["bpe", "apply", "--merges", tmp_path / "m", "--input", tmp_path / "c.txt"], capsys)
    assert code == 2 and "line 3" in out.err


# ------------------------------------------------------------------ bleu

def test_bleu_identity(tmp_path, capsys):
    write_lines(tmp_path / "x", ["the cat sat on the mat", "hello there my friend"])
    code, out = run(["bleu", tmp_path / "x", tmp_path / "x"], capsys)
    assert code == 0 and out.out.strip() == "100.00"


def test_bleu_smooth1(tmp_path, capsys):
    write_lines(tmp_path / "h", ["a b c d"])
    write_lines(tmp_path / "r", ["a b c e"])
    assert run(["bleu", tmp_path / "h", tmp_path / "r"], capsys)[1].out.strip() == "0.00"
    assert run(["bleu", tmp_path / "h", tmp_path / "r", "--smooth1"], capsys)[1].out.strip() == "59.46"


def test_bleu_line_mismatch(tmp_path, capsys):
    write_lines(tmp_path / "h", ["a", "b"])
    write_lines(tmp_path / "r", ["a"])
    assert run(["bleu", tmp_path / "h", tmp_path / "r"], capsys)[0] == 2


# ------------------------------------------------------------------ translit / toygen / gradcheck

def test_translit(tmp_path, capsys):
    write_lines(tmp_path / "in", ["школа школы", "plain ascii"])
    assert run(["translit", "--input", tmp_path / "in", "--out", tmp_path / "out"], capsys)[0] == 0
    assert read_lines(tmp_path / "out") == ["škola školy", "plain ascii"]
    assert run(["translit", "--input", tmp_path / "out", "--out", tmp_path / "again"], capsys)[0] == 0
    assert read_lines(tmp_path / "again") == read_lines(tmp_path / "out")


def test_toygen_tasks(tmp_path, capsys):
    src, tgt = toy_files(tmp_path, capsys, n=10, task="copy")
    assert read_lines(src) == read_lines(tgt)
    src, tgt = toy_files(tmp_path, capsys, n=10, task="reverse")
    assert [s[::-1] for s in read_lines(src)] == read_lines(tgt)
    before = read_lines(src)
    toy_files(tmp_path, capsys, n=10, task="reverse")
    assert read_lines(src) == before
    assert run(["toygen", "--task", "copy", "--n", 0, "--out", tmp_path / "z"], capsys)[0] == 2


def test_toygen_caesar_into_other_alphabet(tmp_path, capsys):
    assert run(["toygen", "--task", "caesar", "--n", 5, "--alphabet", "klmnop", "--target-alphabet", "abcdef",
                "--out", tmp_path / "t", "--pair-tag", "kl-ab"], capsys)[0] == 0
    src, tgt = read_lines(tmp_path / "t.kl-ab.src"), read_lines(tmp_path / "t.kl-ab.tgt")
    table = dict(zip("klmnop", "bcdefa"))
    assert ["".join(table[c] for c in s) for s in src] == tgt


@pytest.mark.slow
def test_gradcheck_passes(capsys):
    code, out = run(["gradcheck"], capsys)
    assert code == 0
    names = [line.split()[1] for line in out.out.splitlines() if line.startswith(("ok", "FAIL"))]
    assert len(names) == len(set(names)) and "src_emb" in names and "out.b" in names


@pytest.mark.slow
def test_gradcheck_detects_fault(capsys):
    code, out = run(["gradcheck", "--inject-fault", "tanh"], capsys)
    assert code == 1 and "relative error" in out.err
