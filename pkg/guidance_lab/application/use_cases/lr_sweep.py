"""
Learning-rate sweep: shortened runs over a fixed list of learning rates,
choosing the one with the lowest selected validation loss.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

from guidance_lab.application.use_cases.run_experiment import run_experiment
from guidance_lab.domain.entities import RunSummary
from guidance_lab.domain.exceptions import ConfigError, SweepFailureError
from guidance_lab.infrastructure.config import ExperimentConfig, resolve_output_dir
from guidance_lab.shared.constants import SWEEP_EPOCH_FRACTION, SWEEP_MULTIPLIERS
from guidance_lab.shared.helpers import get_logger

logger = get_logger(__name__)

SweepRunner = Callable[[ExperimentConfig, Path], RunSummary]


@dataclass
class SweepResult:
    chosen_lr: float
    entries: List[Tuple[float, Optional[float]]] = field(default_factory=list)
    summaries: List[RunSummary] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "chosen_lr": self.chosen_lr,
            "entries": [{"lr": lr, "val_loss": loss} for lr, loss in self.entries],
        }


def sweep_learning_rates(config: ExperimentConfig) -> List[float]:
    """``config.sweep_lrs`` or the base lr times the default multipliers."""
    if config.sweep_lrs:
        lrs = [float(lr) for lr in config.sweep_lrs]
    else:
        lrs = [config.lr * m for m in SWEEP_MULTIPLIERS]
    if len(lrs) != config.sweep_size:
        raise ConfigError(
            f"sweep needs exactly {config.sweep_size} learning rates", details={"lrs": lrs}
        )
    if any(lr <= 0 for lr in lrs):
        raise ConfigError("sweep learning rates must be positive", details={"lrs": lrs})
    return lrs


def sweep_epochs(epochs: int) -> int:
    return max(1, int(epochs * SWEEP_EPOCH_FRACTION))


def choose_lr(entries: Sequence[Tuple[float, Optional[float]]]) -> float:
    """Lowest finite validation loss; ties go to the smaller learning rate."""
    valid = [(loss, lr) for lr, loss in entries if loss is not None and math.isfinite(loss)]
    if not valid:
        raise SweepFailureError("every learning rate in the sweep failed", details={"lrs": [lr for lr, _ in entries]})
    return min(valid)[1]


def _default_runner(config: ExperimentConfig, run_dir: Path) -> RunSummary:
    return run_experiment(config, run_dir=run_dir, save_checkpoints=False).summary


def lr_sweep(
    base_config: ExperimentConfig,
    lrs: Optional[Sequence[float]] = None,
    runner: Optional[SweepRunner] = None,
    run_dir: Optional[Path] = None,
) -> SweepResult:
    """
    Run one shortened experiment per learning rate and pick the best.

    A run whose seeds all fail counts as diverged and is excluded.
    """
    if lrs is not None:
        base_config = base_config.model_copy(update={"sweep_lrs": list(lrs)})
    lrs = sweep_learning_rates(base_config)
    runner = runner or _default_runner
    run_dir = Path(run_dir) if run_dir is not None else resolve_output_dir(base_config) / "sweep"
    epochs = sweep_epochs(base_config.epochs)

    entries: List[Tuple[float, Optional[float]]] = []
    summaries: List[RunSummary] = []
    for index, lr in enumerate(lrs):
        config = base_config.model_copy(
            update={"lr": lr, "epochs": epochs, "experiment_id": f"{base_config.experiment_id}-lr{index}"}
        )
        logger.info(f"Sweep {index + 1}/{len(lrs)}: lr={lr:g}, {epochs} epochs")
        summary = runner(config, run_dir / f"lr{index}")
        summaries.append(summary)
        entries.append((lr, None if summary.failed else summary.selected_val_loss))
        if summary.failed:
            logger.warning(f"Sweep lr={lr:g} diverged on every seed; excluded")

    chosen = choose_lr(entries)
    logger.success(f"Sweep chose lr={chosen:g}")
    return SweepResult(chosen_lr=chosen, entries=entries, summaries=summaries)
