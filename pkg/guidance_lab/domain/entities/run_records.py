"""
Domain entities: EpochRecord, SeedFailure, RunSummary

Per-epoch metrics logged by the harness and the summary selected from them.
"""
from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Any, Dict, Optional, Tuple


@dataclass(frozen=True)
class EpochRecord:
    """
    Metrics for one (seed, epoch).

    Train losses are means over the epoch's steps; ``train_total`` equals
    ``train_task + train_dissim`` up to float rounding.
    """
    seed: int
    epoch: int
    train_total: float
    train_task: float
    train_dissim: float
    val_loss: float
    val_metric: float
    test_loss: Optional[float] = None
    test_metric: Optional[float] = None
    wall_ms: int = 0

    def __post_init__(self) -> None:
        if self.epoch < 1:
            raise ValueError(f"epoch must be >= 1, got {self.epoch}")
        if self.wall_ms < 0:
            raise ValueError("wall_ms must be non-negative")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class SeedFailure:
    """A seed aborted by a non-finite value or another library error."""
    seed: int
    epoch: int
    step: int
    reason: str

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class RunSummary:
    """
    Model selection result for one experiment.

    Attributes:
    - best_epochs: per-seed epoch with the lowest own validation loss
    - selected_epoch: epoch minimizing the seed-mean validation loss
    - selected_val_loss: that seed-mean validation loss
    - test_metric_mean / test_metric_stderr: seed mean and standard error of
      the test metric at ``selected_epoch``
    - failures: seeds that were aborted
    """
    experiment_id: str
    seeds: Tuple[int, ...]
    best_epochs: Tuple[Tuple[int, int], ...]
    selected_epoch: Optional[int]
    selected_val_loss: Optional[float]
    test_metric_mean: Optional[float]
    test_metric_stderr: Optional[float]
    failures: Tuple[SeedFailure, ...] = field(default_factory=tuple)

    @property
    def failed(self) -> bool:
        """True when no seed produced a usable record."""
        return self.selected_epoch is None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment_id": self.experiment_id,
            "seeds": list(self.seeds),
            "best_epochs": {str(seed): epoch for seed, epoch in self.best_epochs},
            "selected_epoch": self.selected_epoch,
            "selected_val_loss": self.selected_val_loss,
            "test_metric_mean": self.test_metric_mean,
            "test_metric_stderr": self.test_metric_stderr,
            "failures": [failure.to_dict() for failure in self.failures],
        }
