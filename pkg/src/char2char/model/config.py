"""Architecture hyperparameters, named presets and the key-value config file format.

Config files hold one ``key = value`` pair per line; ``#`` starts a comment.
Keys are the :class:`ModelConfig` field names. ``filter_bank`` is written as
comma-separated ``width:count`` items, e.g. ``1:200,2:200,3:250``; an empty
value means no convolutional stack (the subword-encoder baseline).
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Union


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    source_vocab_size: int
    target_vocab_size: int
    source_emb_dim: int
    target_emb_dim: int
    filter_bank: tuple = ()  # ((width, count), ...) with widths 1..m
    pool_stride: int = 1
    highway_layers: int = 0
    encoder_hidden: int = 512
    decoder_hidden: int = 1024
    decoder_layers: int = 2
    attention_dim: int = 512
    readout_dim: int = 512
    source_kind: str = "char"  # "char" or "bpe"

    def __post_init__(self):
        object.__setattr__(self, "filter_bank", tuple((int(w), int(n)) for w, n in self.filter_bank))
        self.validate()

    def validate(self) -> None:
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, int) and f.name != "highway_layers" and v <= 0:
                raise ConfigError(f"{f.name} must be positive, got {v}")
        if self.highway_layers < 0:
            raise ConfigError("highway_layers must be >= 0")
        widths = [w for w, _ in self.filter_bank]
        if widths != list(range(1, len(widths) + 1)):
            raise ConfigError(f"filter widths must run 1..m in order, got {widths}")
        if any(n <= 0 for _, n in self.filter_bank):
            raise ConfigError("filter counts must be positive")
        if not self.filter_bank and (self.highway_layers or self.pool_stride != 1):
            raise ConfigError("highway/pooling need a filter bank")
        if self.source_kind not in ("char", "bpe"):
            raise ConfigError(f"source_kind must be 'char' or 'bpe', got {self.source_kind!r}")

    @property
    def num_filters(self) -> int:
        return sum(n for _, n in self.filter_bank)

    @property
    def max_filter_width(self) -> int:
        return len(self.filter_bank)

    @property
    def segment_dim(self) -> int:
        """Width of the vectors fed to the bidirectional GRU."""
        return self.num_filters if self.filter_bank else self.source_emb_dim

    def replace(self, **changes) -> "ModelConfig":
        return dataclasses.replace(self, **changes)


def _bank(counts) -> tuple:
    return tuple((i + 1, n) for i, n in enumerate(counts))


PRESETS: dict[str, ModelConfig] = {
    "bilingual-char": ModelConfig(
        source_vocab_size=300, target_vocab_size=300, source_emb_dim=128, target_emb_dim=512,
        filter_bank=_bank([200, 200, 250, 250, 300, 300, 300, 300]), pool_stride=5,
        highway_layers=4, encoder_hidden=512, decoder_hidden=1024,
    ),
    "multilingual-char": ModelConfig(
        source_vocab_size=400, target_vocab_size=400, source_emb_dim=128, target_emb_dim=512,
        filter_bank=_bank([200, 250, 300, 300, 400, 400, 400, 400]), pool_stride=5,
        highway_layers=4, encoder_hidden=512, decoder_hidden=1024,
    ),
    "bpe2char": ModelConfig(
        source_vocab_size=24440, target_vocab_size=300, source_emb_dim=512, target_emb_dim=512,
        encoder_hidden=512, decoder_hidden=1024, source_kind="bpe",
    ),
    "multilingual-bpe2char": ModelConfig(
        source_vocab_size=54544, target_vocab_size=400, source_emb_dim=512, target_emb_dim=512,
        encoder_hidden=512, decoder_hidden=1024, source_kind="bpe",
    ),
    # gradient-check scale
    "tiny": ModelConfig(
        source_vocab_size=12, target_vocab_size=12, source_emb_dim=4, target_emb_dim=4,
        filter_bank=_bank([3, 3]), pool_stride=2, highway_layers=1, encoder_hidden=5,
        decoder_hidden=7, attention_dim=5, readout_dim=6,
    ),
    # toy-corpus scale
    "small": ModelConfig(
        source_vocab_size=32, target_vocab_size=32, source_emb_dim=32, target_emb_dim=32,
        filter_bank=_bank([32, 32, 32]), pool_stride=2, highway_layers=2, encoder_hidden=64,
        decoder_hidden=128, attention_dim=64, readout_dim=128,
    ),
}

# BPE merge operations learned for the subword baselines
BPE_OPERATIONS = {"bilingual": 20_000, "multilingual": 50_000}


def get_preset(name: str) -> ModelConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


def dumps(config: ModelConfig) -> str:
    lines = []
    for f in dataclasses.fields(config):
        v = getattr(config, f.name)
        if f.name == "filter_bank":
            v = ",".join(f"{w}:{n}" for w, n in v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> ModelConfig:
    fields = {f.name: f for f in dataclasses.fields(ModelConfig)}
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in fields:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key == "filter_bank":
            try:
                values[key] = tuple(tuple(int(x) for x in item.split(":")) for item in value.split(",") if item.strip())
            except ValueError:
                raise ConfigError(f"line {lineno}: filter_bank items must be width:count") from None
        elif key == "source_kind":
            values[key] = value
        else:
            try:
                values[key] = int(value)
            except ValueError:
                raise ConfigError(f"line {lineno}: {key} must be an integer") from None
    try:
        return ModelConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: Union[str, Path]) -> ModelConfig:
    return loads(Path(path).read_text(encoding="utf-8"))


def save_config(config: ModelConfig, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(config), encoding="utf-8")
