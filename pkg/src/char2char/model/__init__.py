"""Character-level convolutional encoder, attention and two-layer GRU decoder."""
from .config import BPE_OPERATIONS, PRESETS, ConfigError, ModelConfig, dumps, get_preset, load_config, loads, save_config
from .layers import bidirectional_gru, embed_source, gru_cell, gru_step, half_conv, highway, highway_stack, maxpool_stride
from .checkpoint import CheckpointError, load_checkpoint, read_checkpoint, save_checkpoint
from .network import Char2Char, DecoderState, EncodedSource, count_parameters, parameter_shapes

__all__ = [
    "BPE_OPERATIONS", "PRESETS", "Char2Char", "CheckpointError", "ConfigError", "DecoderState", "EncodedSource", "ModelConfig",
    "bidirectional_gru", "count_parameters", "dumps", "embed_source", "get_preset", "gru_cell", "gru_step",
    "half_conv", "highway", "highway_stack", "load_config", "loads", "maxpool_stride", "parameter_shapes",
    "load_checkpoint", "read_checkpoint", "save_checkpoint", "save_config",
]
