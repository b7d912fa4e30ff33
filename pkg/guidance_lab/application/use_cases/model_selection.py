"""
Epoch selection across seeds: the epoch with the lowest seed-mean
validation loss, reported with the seed mean and standard error of the
test metric at that epoch.
"""
from __future__ import annotations

from collections import defaultdict
from typing import Dict, Iterable, List, Sequence

import numpy as np

from guidance_lab.domain.entities import EpochRecord, RunSummary, SeedFailure
from guidance_lab.domain.exceptions import RaggedEpochsError


def standard_error(values: Sequence[float]) -> float:
    """Sample standard deviation over sqrt(n); 0 for a single value."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1) / np.sqrt(values.size))


def select_best_epoch(
    records: Iterable[EpochRecord],
    experiment_id: str = "",
    failures: Sequence[SeedFailure] = (),
) -> RunSummary:
    """
    Build the RunSummary for one experiment.

    Records of failed seeds are ignored. Ties on the seed-mean validation
    loss go to the earliest epoch, as do ties on a seed's own best epoch.
    """
    failed = {f.seed for f in failures}
    by_seed: Dict[int, Dict[int, EpochRecord]] = defaultdict(dict)
    for record in records:
        if record.seed not in failed:
            by_seed[record.seed][record.epoch] = record
    all_seeds = tuple(sorted(set(by_seed) | failed))

    if not by_seed:
        return RunSummary(
            experiment_id=experiment_id,
            seeds=all_seeds,
            best_epochs=(),
            selected_epoch=None,
            selected_val_loss=None,
            test_metric_mean=None,
            test_metric_stderr=None,
            failures=tuple(failures),
        )

    seeds = sorted(by_seed)
    epochs = sorted(by_seed[seeds[0]])
    for seed in seeds[1:]:
        if sorted(by_seed[seed]) != epochs:
            raise RaggedEpochsError(
                "seeds have different epoch sets",
                details={"seed": seed, "expected": epochs, "found": sorted(by_seed[seed])},
            )

    best_epochs = []
    for seed in seeds:
        own = [by_seed[seed][e].val_loss for e in epochs]
        best_epochs.append((seed, epochs[int(np.argmin(own))]))

    mean_val = [float(np.mean([by_seed[s][e].val_loss for s in seeds])) for e in epochs]
    chosen = int(np.argmin(mean_val))  # first minimum = earliest epoch
    selected_epoch = epochs[chosen]

    test_values: List[float] = [
        by_seed[s][selected_epoch].test_metric for s in seeds if by_seed[s][selected_epoch].test_metric is not None
    ]
    return RunSummary(
        experiment_id=experiment_id,
        seeds=all_seeds,
        best_epochs=tuple(best_epochs),
        selected_epoch=selected_epoch,
        selected_val_loss=mean_val[chosen],
        test_metric_mean=float(np.mean(test_values)) if test_values else None,
        test_metric_stderr=standard_error(test_values) if test_values else None,
        failures=tuple(failures),
    )
