"""
Value objects for tasks, task losses and optimizers.
"""
from __future__ import annotations

from enum import Enum


class TaskName(str, Enum):
    COPY_PASTE = "copy_paste"
    PARITY = "parity"
    LANGUAGE_MODELING = "lm"
    IMAGES = "images"

    @property
    def is_sequence(self) -> bool:
        return self in (TaskName.COPY_PASTE, TaskName.PARITY, TaskName.LANGUAGE_MODELING)

    @property
    def is_per_token(self) -> bool:
        return self in (TaskName.COPY_PASTE, TaskName.LANGUAGE_MODELING)

    def __str__(self) -> str:
        return self.value


class TaskLossName(str, Enum):
    CROSS_ENTROPY = "cross_entropy"
    BCE = "bce"
    MSE = "mse"

    def __str__(self) -> str:
        return self.value


class OptimizerName(str, Enum):
    ADAM = "adam"
    ADAMW = "adamw"

    def __str__(self) -> str:
        return self.value
