"""Binary checkpoint container.

Layout: the 8-byte magic ``C2CCKPT1``, a little-endian uint64 header length,
a UTF-8 JSON header, then every parameter as little-endian float32 in header
order. The header records the model config (key-value text), both
vocabularies, optional BPE merges and, per parameter, its canonical name,
shape, byte offset and byte count.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ..data.vocab import Vocabulary
from ..numerics import Tensor
from .config import dumps, loads
from .network import Char2Char

MAGIC = b"C2CCKPT1"


class CheckpointError(ValueError):
    pass


def save_checkpoint(path: Union[str, Path], model: Char2Char, source_vocab: Vocabulary, target_vocab: Vocabulary,
                    merges: Optional[list] = None, extra: Optional[dict] = None) -> None:
    entries, blobs, offset = [], [], 0
    for name, p in model.parameters().items():
        blob = np.ascontiguousarray(p.data, dtype="<f4").tobytes()
        entries.append({"name": name, "shape": list(p.shape), "offset": offset, "nbytes": len(blob)})
        blobs.append(blob)
        offset += len(blob)
    header = {
        "format": 1,
        "dtype": "float32-le",
        "config": dumps(model.config),
        "source_vocab": {"kind": source_vocab.kind, "symbols": source_vocab.symbols},
        "target_vocab": {"kind": target_vocab.kind, "symbols": target_vocab.symbols},
        "merges": [list(m) for m in merges] if merges else None,
        "params": entries,
        "extra": extra or {},
    }
    raw = json.dumps(header, ensure_ascii=False).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<Q", len(raw)))
        f.write(raw)
        for blob in blobs:
            f.write(blob)


def read_checkpoint(path: Union[str, Path]) -> tuple[dict, dict]:
    """Header and name -> float32 array, without building a model."""
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    (n,) = struct.unpack("<Q", data[8:16])
    header = json.loads(data[16:16 + n].decode("utf-8"))
    base = 16 + n
    arrays = {}
    for e in header["params"]:
        start = base + e["offset"]
        arr = np.frombuffer(data, dtype="<f4", count=e["nbytes"] // 4, offset=start)
        arrays[e["name"]] = arr.reshape(e["shape"]).astype(np.float32)
    return header, arrays


def load_checkpoint(path: Union[str, Path], config=None):
    """Returns (model, source_vocab, target_vocab, merges).

    Passing ``config`` forces that architecture; a mismatch raises ValueError
    naming the offending parameter shapes.
    """
    header, arrays = read_checkpoint(path)
    cfg = loads(header["config"]) if config is None else config
    params = {k: Tensor(v, requires_grad=True, name=k) for k, v in arrays.items()}
    model = Char2Char(cfg, params)
    sv = Vocabulary(header["source_vocab"]["symbols"], header["source_vocab"]["kind"])
    tv = Vocabulary(header["target_vocab"]["symbols"], header["target_vocab"]["kind"])
    merges = [tuple(m) for m in header["merges"]] if header.get("merges") else None
    return model, sv, tv, merges
