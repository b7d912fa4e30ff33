"""
Value object: NetworkFamily

Enumerates the architecture families the network zoo can build.
"""
from __future__ import annotations

from enum import Enum


class NetworkFamily(str, Enum):
    """Architecture families; values are the config-file spellings."""
    FCN = "fcn"
    PLAIN_CNN = "plain_cnn"
    RES_CNN = "res_cnn"
    RNN_STACK = "rnn_stack"
    TRANSFORMER_ENCODER = "transformer_encoder"
    TRANSFORMER_DECODER = "transformer_decoder"
    PATCH_VIT = "patch_vit"

    @property
    def is_cnn(self) -> bool:
        return self in (NetworkFamily.PLAIN_CNN, NetworkFamily.RES_CNN)

    @property
    def is_sequence(self) -> bool:
        return self in (
            NetworkFamily.RNN_STACK,
            NetworkFamily.TRANSFORMER_ENCODER,
            NetworkFamily.TRANSFORMER_DECODER,
        )

    @property
    def is_transformer(self) -> bool:
        return self in (
            NetworkFamily.TRANSFORMER_ENCODER,
            NetworkFamily.TRANSFORMER_DECODER,
            NetworkFamily.PATCH_VIT,
        )

    def __str__(self) -> str:
        return self.value


class Activation(str, Enum):
    RELU = "relu"
    TANH = "tanh"

    def __str__(self) -> str:
        return self.value


class Readout(str, Enum):
    """How a sequence network turns per-position states into outputs."""
    PER_TOKEN = "per_token"
    LAST = "last"
    MEAN = "mean"

    def __str__(self) -> str:
        return self.value
