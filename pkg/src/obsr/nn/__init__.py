"""Minimal neural-network kernel: dense/LSTM/attention layers, losses,
Adam, and finite-difference gradient verification. float64 throughout."""

from obsr.nn.attention import MultiheadSelfAttention
from obsr.nn.checkpoint import load_checkpoint, save_checkpoint
from obsr.nn.core import (
    Dense,
    Dropout,
    Parameter,
    ReLU,
    Sequential,
    ShapeMismatch,
    Sigmoid,
    mlp,
    sigmoid,
)
from obsr.nn.gradcheck import grad_check
from obsr.nn.losses import (
    ClassOutOfRange,
    cross_entropy,
    expected_log_distance,
    l1,
    log_softmax,
    smooth_l1,
    softmax,
)
from obsr.nn.optim import Adam
from obsr.nn.recurrent import LSTMLayer, StackedLSTM

__all__ = [
    "Adam",
    "ClassOutOfRange",
    "Dense",
    "Dropout",
    "LSTMLayer",
    "MultiheadSelfAttention",
    "Parameter",
    "ReLU",
    "Sequential",
    "ShapeMismatch",
    "Sigmoid",
    "StackedLSTM",
    "cross_entropy",
    "expected_log_distance",
    "grad_check",
    "l1",
    "load_checkpoint",
    "log_softmax",
    "mlp",
    "save_checkpoint",
    "sigmoid",
    "smooth_l1",
    "softmax",
]
