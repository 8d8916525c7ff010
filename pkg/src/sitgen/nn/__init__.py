"""From-scratch neural-network engine and the two-branch situation tagger."""

from .gradcheck import grad_check
from .layers import (
    BN_EPS,
    BN_MOMENTUM,
    BatchNorm2d,
    Conv3x3,
    Dense,
    Dropout,
    Flatten,
    Layer,
    MaxPool2x2,
    ReLU,
    softmax,
)
from .model import (
    AUDIO_EMBEDDING_DIM,
    FULL_INPUT_SHAPE,
    REDUCED_INPUT_SHAPE,
    UamatConfig,
    UamatModel,
    batch_loss,
    forward,
    loss,
)
from .modelio import load_model, model_to_bytes, save_model
from .training import Adam, EpochStats, TrainConfig, TrainHistory, stratified_holdout, train

__all__ = [
    "AUDIO_EMBEDDING_DIM",
    "Adam",
    "BN_EPS",
    "BN_MOMENTUM",
    "BatchNorm2d",
    "Conv3x3",
    "Dense",
    "Dropout",
    "EpochStats",
    "FULL_INPUT_SHAPE",
    "Flatten",
    "Layer",
    "MaxPool2x2",
    "REDUCED_INPUT_SHAPE",
    "ReLU",
    "TrainConfig",
    "TrainHistory",
    "UamatConfig",
    "UamatModel",
    "batch_loss",
    "forward",
    "grad_check",
    "load_model",
    "loss",
    "save_model",
    "model_to_bytes",
    "softmax",
    "stratified_holdout",
    "train",
]
