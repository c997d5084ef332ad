"""Minimal dense tensor algebra with reverse-mode gradients and the layers
used by the predictor: linear, PReLU, MLP, relational graph convolution,
LSTM cell, masked MSE and Adam."""

from .tensor import Tensor, aggregate, concat, gather_rows, prelu, sigmoid, tanh
from .layers import (
    Linear,
    LstmCell,
    Mlp,
    Module,
    PRelu,
    RgcnLayer,
    masked_mse,
    relation_coefficients,
)
from .optim import AdamState, adam_step
from .gradcheck import gradcheck
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "AdamState",
    "Linear",
    "LstmCell",
    "Mlp",
    "Module",
    "PRelu",
    "RgcnLayer",
    "Tensor",
    "adam_step",
    "aggregate",
    "concat",
    "gather_rows",
    "gradcheck",
    "load_checkpoint",
    "masked_mse",
    "prelu",
    "relation_coefficients",
    "save_checkpoint",
    "sigmoid",
    "tanh",
]
