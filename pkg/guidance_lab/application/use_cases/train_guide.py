"""
Train Guide use case - train a network on its task with the plain task loss
and publish its best checkpoint as a guide.
"""
from __future__ import annotations

import shutil
from pathlib import Path
from typing import Optional, Tuple

from guidance_lab.application.use_cases.run_experiment import ExperimentResult, run_experiment
from guidance_lab.domain.exceptions import CheckpointError, ConfigError
from guidance_lab.infrastructure.config import ExperimentConfig
from guidance_lab.shared.helpers import get_logger

logger = get_logger(__name__)

GUIDE_FILE = "guide.glab"


def train_guide(
    config: ExperimentConfig,
    output_path: Optional[Path] = None,
    run_dir: Optional[Path] = None,
) -> Tuple[Path, ExperimentResult]:
    """
    Train ``config.target_spec`` without guidance and copy the best-val
    checkpoint of the seed with the lowest validation loss to ``output_path``
    (default ``<run_dir>/guide.glab``).
    """
    if config.guidance.enabled:
        raise ConfigError("a guide is trained without guidance; set guidance.guide_mode to none")
    result = run_experiment(config, run_dir=run_dir)
    candidates = [r for r in result.seed_results if r.failure is None and r.best_checkpoint is not None]
    if not candidates:
        raise CheckpointError("no seed produced a guide checkpoint", details={"experiment": config.experiment_id})
    best = min(candidates, key=lambda r: (r.best_val_loss, r.seed))

    target = Path(output_path) if output_path is not None else result.run_dir / GUIDE_FILE
    target.parent.mkdir(parents=True, exist_ok=True)
    shutil.copyfile(best.best_checkpoint, target)
    logger.success(f"Guide {config.experiment_id}: seed {best.seed} (val_loss={best.best_val_loss:.4f}) -> {target}")
    return target, result
