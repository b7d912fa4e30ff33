"""
Post-hoc analysis: error consistency between classifiers and training
curves read back from run logs.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Union

import numpy as np
import pandas as pd

from guidance_lab.domain.entities import ErrorConsistencyReport, PredictionSet
from guidance_lab.domain.exceptions import DatasetError, EmptySeriesError, SchemaError, UndefinedKappaError
from guidance_lab.shared.constants import LOG_COLUMNS
from guidance_lab.shared.helpers import get_logger

logger = get_logger(__name__)

_NUMERIC_COLUMNS = ("seed", "epoch", "step", "total_loss", "task_loss", "dissim_loss", "lr", "wall_ms")


# ============================================================================
# ERROR CONSISTENCY
# ============================================================================

def error_consistency(p1: PredictionSet, p2: PredictionSet) -> ErrorConsistencyReport:
    """
    Chance-corrected agreement of two classifiers' per-example correctness.

    c_obs is the fraction of examples both get right or both get wrong;
    c_exp = a1*a2 + (1 - a1)*(1 - a2) is the overlap expected from the
    accuracies alone; kappa = (c_obs - c_exp) / (1 - c_exp).
    """
    right1 = p1.correctness()
    right2 = p2.correctness()
    if set(right1) != set(right2):
        missing = sorted(set(right1) ^ set(right2))
        raise DatasetError("prediction sets cover different examples", details={"ids": missing[:5]})
    if not right1:
        raise DatasetError("prediction sets are empty")

    agree = sum(right1[i] == right2[i] for i in right1)
    c_obs = agree / len(right1)
    a1, a2 = p1.accuracy, p2.accuracy
    c_exp = a1 * a2 + (1.0 - a1) * (1.0 - a2)
    if c_exp >= 1.0:
        raise UndefinedKappaError(
            "kappa is undefined when expected overlap is 1", details={"a1": a1, "a2": a2}
        )
    kappa = (c_obs - c_exp) / (1.0 - c_exp)
    return ErrorConsistencyReport(c_obs=c_obs, c_exp=c_exp, kappa=float(np.clip(kappa, -1.0, 1.0)))


def kappa_matrix(predictions: Mapping[str, PredictionSet]) -> pd.DataFrame:
    """Pairwise kappa table; undefined pairs hold NaN, the diagonal is 1 where defined."""
    names = list(predictions)
    table = pd.DataFrame(np.nan, index=names, columns=names, dtype=float)
    for left, right in itertools.combinations_with_replacement(names, 2):
        try:
            kappa = error_consistency(predictions[left], predictions[right]).kappa
        except UndefinedKappaError:
            logger.warning(f"kappa undefined for {left} vs {right}")
            continue
        table.loc[left, right] = table.loc[right, left] = kappa
    return table


# ============================================================================
# CURVES
# ============================================================================

@dataclass(frozen=True)
class CurveSeries:
    """Seed-mean curve of one run with its standard error per x value."""
    label: str
    x: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    count: np.ndarray

    def __len__(self) -> int:
        return int(self.x.shape[0])


def read_log(path: Union[str, Path]) -> pd.DataFrame:
    """Load a run CSV and check it against the log schema."""
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype={"experiment_id": str, "split": str}, keep_default_na=False, na_values=[""])
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise SchemaError(f"cannot parse run log {path}", details={"error": str(e)}) from e
    if tuple(frame.columns) != LOG_COLUMNS:
        raise SchemaError("run log columns do not match the schema", details={"path": str(path), "columns": list(frame.columns)})
    for column in _NUMERIC_COLUMNS + ("metric",):
        try:
            frame[column] = pd.to_numeric(frame[column])
        except (ValueError, TypeError) as e:
            raise SchemaError(f"non-numeric values in column {column}", details={"path": str(path)}) from e
    if frame[list(_NUMERIC_COLUMNS)].isna().any().any():
        raise SchemaError("missing values in required columns", details={"path": str(path)})
    return frame


def seed_curve(frame: pd.DataFrame, column: str, split: str, x: str, label: str) -> CurveSeries:
    """Mean and standard error over seeds of ``column`` for rows of ``split``, keyed by ``x``."""
    rows = frame[frame["split"] == split]
    if rows.empty:
        raise EmptySeriesError(f"no {split} rows for {label}")
    table = rows.pivot_table(index=x, columns="seed", values=column, aggfunc="mean").sort_index()
    count = table.notna().sum(axis=1)
    mean = table.mean(axis=1)
    std = table.std(axis=1, ddof=1).where(count > 1, 0.0).fillna(0.0)
    stderr = std / np.sqrt(count)
    return CurveSeries(
        label=label,
        x=table.index.to_numpy(dtype=np.float64),
        mean=mean.to_numpy(dtype=np.float64),
        stderr=stderr.to_numpy(dtype=np.float64),
        count=count.to_numpy(dtype=np.int64),
    )


def _run_label(frame: pd.DataFrame, path: Path) -> str:
    ids = frame["experiment_id"].dropna().unique()
    return str(ids[0]) if len(ids) else path.parent.name


def extract_curves(
    log_paths: Sequence[Union[str, Path]],
    column: str = "dissim_loss",
    split: str = "train",
    x: str = "step",
) -> List[CurveSeries]:
    """One seed-aggregated series per run log."""
    if column not in LOG_COLUMNS or x not in LOG_COLUMNS:
        raise SchemaError("unknown log column", details={"column": column, "x": x})
    series = []
    for path in log_paths:
        path = Path(path)
        frame = read_log(path)
        series.append(seed_curve(frame, column, split, x, _run_label(frame, path)))
    return series


def extract_dissim_curves(log_paths: Sequence[Union[str, Path]]) -> List[CurveSeries]:
    """Per-step dissimilarity loss, seed mean and standard error, one series per run."""
    return extract_curves(log_paths, "dissim_loss", "train", "step")


def extract_loss_curves(log_paths: Sequence[Union[str, Path]]) -> Dict[str, List[CurveSeries]]:
    """Train total/task/dissimilarity per step and val loss/metric per epoch."""
    return {
        "train_total": extract_curves(log_paths, "total_loss", "train", "step"),
        "train_task": extract_curves(log_paths, "task_loss", "train", "step"),
        "train_dissim": extract_curves(log_paths, "dissim_loss", "train", "step"),
        "val_loss": extract_curves(log_paths, "task_loss", "val", "epoch"),
        "val_metric": extract_curves(log_paths, "metric", "val", "epoch"),
    }
