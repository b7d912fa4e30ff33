"""
Run Experiment use case - train every seed of a config and write its log,
checkpoints and summary.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

from guidance_lab.application.services.trainer_service import SeedResult, train_seeds
from guidance_lab.application.use_cases.model_selection import select_best_epoch
from guidance_lab.domain.entities import DatasetSplit, RunSummary
from guidance_lab.infrastructure.config import ExperimentConfig, resolve_output_dir
from guidance_lab.infrastructure.datasets import build_dataset
from guidance_lab.infrastructure.integrations.run_logger import LOG_FILE, SUMMARY_FILE, CsvRunLogger, write_summary
from guidance_lab.shared.helpers import get_logger, log_duration

logger = get_logger(__name__)

CONFIG_FILE = "config.json"


@dataclass
class ExperimentResult:
    summary: RunSummary
    run_dir: Path
    seed_results: List[SeedResult] = field(default_factory=list)

    @property
    def log_path(self) -> Path:
        return self.run_dir / LOG_FILE

    @property
    def summary_path(self) -> Path:
        return self.run_dir / SUMMARY_FILE

    def records(self):
        return [record for result in self.seed_results for record in result.records]


def run_experiment(
    config: ExperimentConfig,
    dataset: Optional[DatasetSplit] = None,
    run_dir: Optional[Path] = None,
    save_checkpoints: bool = True,
) -> ExperimentResult:
    """
    Train all seeds of ``config`` and select the best epoch.

    Artifacts in ``run_dir`` (default: output dir / experiment id):
    ``config.json``, ``log.csv``, ``summary.json`` and per-seed
    ``seed_<n>/last.glab`` and ``best.glab``.
    """
    run_dir = Path(run_dir) if run_dir is not None else resolve_output_dir(config)
    run_dir.mkdir(parents=True, exist_ok=True)
    if dataset is None:
        dataset = build_dataset(config.data, config.task)

    with open(run_dir / CONFIG_FILE, "w", encoding="utf-8") as f:
        json.dump(config.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")

    logger.info(f"Experiment {config.experiment_id}: seeds={config.seeds} epochs={config.epochs} -> {run_dir}")
    with log_duration(logger, f"Experiment {config.experiment_id}"):
        with CsvRunLogger(run_dir / LOG_FILE, config.experiment_id) as log:
            results = train_seeds(config, dataset, run_dir, log, save_checkpoints)

    failures = [r.failure for r in results if r.failure is not None]
    records = [record for r in results for record in r.records]
    summary = select_best_epoch(records, config.experiment_id, failures)
    write_summary(run_dir / SUMMARY_FILE, summary)

    if summary.failed:
        logger.error(f"Experiment {config.experiment_id}: every seed failed")
    else:
        logger.success(
            f"Experiment {config.experiment_id}: epoch {summary.selected_epoch} "
            f"val_loss={summary.selected_val_loss:.4f} "
            f"test={summary.test_metric_mean} ± {summary.test_metric_stderr}"
        )
    return ExperimentResult(summary=summary, run_dir=run_dir, seed_results=results)
