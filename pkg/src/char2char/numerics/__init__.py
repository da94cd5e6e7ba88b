"""Tensor arithmetic with tape-based reverse-mode differentiation."""
from .gradcheck import GradCheckReport, check_gradients, numeric_gradient, relative_error
from .ops import (
    add, as_tensor, concat, div, elementwise, embedding, exp, getitem, half_padding, log,
    log_softmax, matmul, maxpool1d, mean, mul, neg, pick, relu, reshape, sigmoid, softmax,
    stack, sub, sum, tanh, transpose, unfold1d, where,
)
from .tensor import DimensionError, Tape, Tensor, active_tape, backward, inject_backward_fault

__all__ = [
    "DimensionError", "GradCheckReport", "Tape", "Tensor", "active_tape", "add", "as_tensor",
    "backward", "check_gradients", "concat", "div", "elementwise", "embedding", "exp", "getitem",
    "half_padding", "inject_backward_fault", "log", "log_softmax", "matmul", "maxpool1d", "mean",
    "mul", "neg", "numeric_gradient", "pick", "relative_error", "relu", "reshape", "sigmoid",
    "softmax", "stack", "sub", "sum", "tanh", "transpose", "unfold1d", "where",
]
