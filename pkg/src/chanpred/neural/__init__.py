"""Shallow RNN/LSTM channel predictors written directly in numpy."""

from chanpred.neural.blocks import Dataset, encode_window, make_blocks
from chanpred.neural.model import (
    Architecture,
    RecurrentModel,
    forward,
    gradients,
    init_model,
    loss,
)
from chanpred.neural.optim import Adam, adam_step
from chanpred.neural.training import TrainConfig, TrainResult, predict_nn, predict_segment_nn, train
from chanpred.neural.serialize import load_model, save_model

__all__ = [
    "Adam",
    "Architecture",
    "Dataset",
    "RecurrentModel",
    "TrainConfig",
    "TrainResult",
    "adam_step",
    "encode_window",
    "forward",
    "gradients",
    "init_model",
    "load_model",
    "loss",
    "make_blocks",
    "predict_nn",
    "predict_segment_nn",
    "save_model",
    "train",
]
