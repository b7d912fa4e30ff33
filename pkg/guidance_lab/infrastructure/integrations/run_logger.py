"""
Run artifacts: the per-experiment CSV log and the summary JSON.

Every CSV starts with the LOG_COLUMNS header. Floats are written with
``repr`` so the file round-trips exactly and identical runs produce
identical bytes.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, Optional, Union

from guidance_lab.domain.entities import RunSummary
from guidance_lab.shared.constants import LOG_COLUMNS
from guidance_lab.shared.helpers import get_logger

logger = get_logger(__name__)

LOG_FILE = "log.csv"
SUMMARY_FILE = "summary.json"


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


class CsvRunLogger:
    """
    Append-only writer for one experiment's CSV log.

    Usage:
        with CsvRunLogger(run_dir / "log.csv", "exp1") as log:
            log.row(seed=0, epoch=1, step=10, split="train", total_loss=1.2, ...)
    """

    def __init__(self, path: Union[str, Path], experiment_id: str):
        self.path = Path(path)
        self.experiment_id = experiment_id
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = open(self.path, "w", encoding="utf-8", newline="")
        self._writer = csv.writer(self._file, lineterminator="\n")
        self._writer.writerow(LOG_COLUMNS)
        self.rows = 0

    def row(
        self,
        *,
        seed: int,
        epoch: int,
        step: int,
        split: str,
        total_loss: float,
        task_loss: float,
        dissim_loss: float,
        metric: Optional[float] = None,
        lr: float,
        wall_ms: int = 0,
    ) -> None:
        values: Dict[str, Any] = {
            "experiment_id": self.experiment_id,
            "seed": seed,
            "epoch": epoch,
            "step": step,
            "split": split,
            "total_loss": float(total_loss),
            "task_loss": float(task_loss),
            "dissim_loss": float(dissim_loss),
            "metric": None if metric is None else float(metric),
            "lr": float(lr),
            "wall_ms": int(wall_ms),
        }
        self._writer.writerow([_cell(values[column]) for column in LOG_COLUMNS])
        self.rows += 1

    def flush(self) -> None:
        self._file.flush()

    def close(self) -> None:
        if not self._file.closed:
            self._file.close()
            logger.debug(f"wrote {self.rows} log rows to {self.path}")

    def __enter__(self) -> "CsvRunLogger":
        return self

    def __exit__(self, *exc: Any) -> None:
        self.close()


def write_summary(path: Union[str, Path], summary: RunSummary, extra: Optional[Dict[str, Any]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = summary.to_dict()
    if extra:
        document.update(extra)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def read_summary(path: Union[str, Path]) -> Dict[str, Any]:
    with open(path, encoding="utf-8") as f:
        return json.load(f)
