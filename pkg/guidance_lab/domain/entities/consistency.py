"""
Domain entities: PredictionSet, ErrorConsistencyReport
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple


@dataclass(frozen=True)
class PredictionSet:
    """
    Per-example class predictions of one classifier.

    ``accuracy`` must agree with the labels within 1e-9; ids must be unique.
    """
    ids: Tuple[str, ...]
    predicted: Tuple[int, ...]
    true: Tuple[int, ...]
    accuracy: float

    def __post_init__(self) -> None:
        for name in ("ids", "predicted", "true"):
            value = getattr(self, name)
            if not isinstance(value, tuple):
                object.__setattr__(self, name, tuple(value))
        if not (len(self.ids) == len(self.predicted) == len(self.true)):
            raise ValueError("ids, predicted and true must have equal lengths")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("prediction ids must be unique")
        if self.ids and abs(self.recomputed_accuracy() - self.accuracy) > 1e-9:
            raise ValueError(
                f"stored accuracy {self.accuracy} disagrees with labels ({self.recomputed_accuracy()})"
            )

    @classmethod
    def from_labels(cls, ids, predicted, true) -> "PredictionSet":
        predicted = tuple(int(p) for p in predicted)
        true = tuple(int(t) for t in true)
        correct = sum(p == t for p, t in zip(predicted, true))
        accuracy = correct / len(true) if true else 0.0
        return cls(ids=tuple(ids), predicted=predicted, true=true, accuracy=accuracy)

    def recomputed_accuracy(self) -> float:
        correct = sum(p == t for p, t in zip(self.predicted, self.true))
        return correct / len(self.true)

    def correctness(self) -> dict:
        """Map id -> whether the prediction was correct."""
        return {i: p == t for i, p, t in zip(self.ids, self.predicted, self.true)}


@dataclass(frozen=True)
class ErrorConsistencyReport:
    """Observed and expected error overlap and the chance-corrected kappa."""
    c_obs: float
    c_exp: float
    kappa: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.c_obs <= 1.0:
            raise ValueError(f"c_obs must lie in [0, 1], got {self.c_obs}")
        if not 0.0 <= self.c_exp <= 1.0:
            raise ValueError(f"c_exp must lie in [0, 1], got {self.c_exp}")
        if not -1.0 - 1e-12 <= self.kappa <= 1.0 + 1e-12:
            raise ValueError(f"kappa must lie in [-1, 1], got {self.kappa}")
