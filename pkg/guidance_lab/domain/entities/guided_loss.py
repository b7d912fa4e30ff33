"""
Domain entity: GuidedLossBreakdown

Task loss, per-layer dissimilarities and their total for one training step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Tuple


def _scalar(value: Any) -> float:
    data = getattr(value, "data", value)
    return float(data)


@dataclass(frozen=True)
class GuidedLossBreakdown:
    """
    Immutable breakdown of the guided objective.

    ``task_loss``, ``dissimilarity_total`` and ``total`` are scalar tensors
    (``total`` is what backward runs on); ``per_layer`` holds
    ((guide_index, target_index), scalar tensor) tuples.
    """
    task_loss: Any
    dissimilarity_total: Any
    total: Any
    per_layer: Tuple[Tuple[Tuple[int, int], Any], ...] = field(default_factory=tuple)

    @property
    def task_value(self) -> float:
        return _scalar(self.task_loss)

    @property
    def dissimilarity_value(self) -> float:
        return _scalar(self.dissimilarity_total)

    @property
    def total_value(self) -> float:
        return _scalar(self.total)

    def per_layer_values(self) -> Tuple[Tuple[Tuple[int, int], float], ...]:
        return tuple((pair, _scalar(value)) for pair, value in self.per_layer)
