"""Loss, optimizer, clipping and the training loop."""
from .loop import NonFiniteLossError, TrainConfig, TrainResult, encode_pairs, encode_source, token_accuracy, train
from .loss import nll_loss
from .optim import Adam, adam_step, clip_gradients, global_norm, init_parameters, zero_grad

__all__ = [
    "Adam", "NonFiniteLossError", "TrainConfig", "TrainResult", "adam_step", "clip_gradients", "encode_pairs",
    "encode_source", "global_norm", "init_parameters", "nll_loss", "token_accuracy", "train", "zero_grad",
]
