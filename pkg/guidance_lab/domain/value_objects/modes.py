"""
Value objects for guidance and normalization behavior.
"""
from __future__ import annotations

from enum import Enum


class GuideMode(str, Enum):
    """Where the guide comes from and what it is fed."""
    TRAINED = "trained"
    UNTRAINED = "untrained"
    NOISE = "noise"
    NONE = "none"

    def __str__(self) -> str:
        return self.value


class GuideInput(str, Enum):
    """What the guide network receives at each step."""
    SAME = "same"
    NOISE = "noise"

    def __str__(self) -> str:
        return self.value


class MetricName(str, Enum):
    CKA = "cka"
    RSA = "rsa"

    def __str__(self) -> str:
        return self.value


class NormMode(str, Enum):
    """
    Normalization behavior of a network.

    - TRAIN: batch statistics, running statistics updated
    - EVAL: running statistics, nothing updated
    - FROZEN: batch statistics, running statistics never updated (untrained guides)
    """
    TRAIN = "train"
    EVAL = "eval"
    FROZEN = "frozen"

    def __str__(self) -> str:
        return self.value
