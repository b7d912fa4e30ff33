"""
Collation of examples into padded numpy batches.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from guidance_lab.domain.entities import ImageExample, ParityExample, SequenceExample
from guidance_lab.domain.exceptions import DatasetError
from guidance_lab.shared.constants import IGNORE_INDEX, MIN_METRIC_BATCH
from guidance_lab.shared.core import RngState

from .parity import parity_tokens


@dataclass(frozen=True)
class Batch:
    """
    One minibatch.

    ``inputs`` is b x T integer tokens or b x C x H x W floats; ``targets`` is
    b x T (per-token tasks, IGNORE_INDEX on unscored positions) or b labels.
    ``pad_mask`` is True on real sequence positions and None for images.
    """
    inputs: np.ndarray
    targets: np.ndarray
    pad_mask: Optional[np.ndarray]
    ids: Tuple[str, ...]

    @property
    def size(self) -> int:
        return int(self.inputs.shape[0])

    def __len__(self) -> int:
        return self.size


def _pad_rows(rows: Sequence[Sequence[int]], fill: int) -> np.ndarray:
    width = max(len(r) for r in rows)
    out = np.full((len(rows), width), fill, dtype=np.int64)
    for i, row in enumerate(rows):
        out[i, :len(row)] = row
    return out


def collate(examples: Sequence[Any], pad_id: int = 0) -> Batch:
    """Stack same-kind examples; variable-length sequences are right-padded and masked."""
    if not examples:
        raise DatasetError("cannot collate an empty batch")
    ids = tuple(ex.example_id for ex in examples)
    first = examples[0]

    if isinstance(first, ImageExample):
        inputs = np.stack([np.asarray(ex.pixels, dtype=np.float32) for ex in examples])
        targets = np.asarray([ex.label for ex in examples], dtype=np.int64)
        return Batch(inputs, targets, None, ids)

    if isinstance(first, ParityExample):
        rows = [parity_tokens(ex.bits) for ex in examples]
        inputs = _pad_rows(rows, pad_id)
        mask = _pad_rows([[1] * len(r) for r in rows], 0).astype(bool)
        targets = np.asarray([ex.label for ex in examples], dtype=np.int64)
        return Batch(inputs, targets, mask, ids)

    if isinstance(first, SequenceExample):
        inputs = _pad_rows([ex.input_tokens for ex in examples], pad_id)
        targets = _pad_rows([ex.target_tokens for ex in examples], IGNORE_INDEX)
        mask = _pad_rows([[int(m) for m in ex.pad_mask] for ex in examples], 0).astype(bool)
        return Batch(inputs, targets, mask, ids)

    raise DatasetError(f"cannot collate examples of type {type(first).__name__}")


def batch_bounds(n: int, batch_size: int, min_batch: int = MIN_METRIC_BATCH) -> List[Tuple[int, int]]:
    """
    Contiguous [start, stop) ranges of ``batch_size``.

    A trailing remainder smaller than ``min_batch`` is folded into the
    previous batch so every batch can be fed to the dissimilarity metrics.
    """
    if batch_size < 1:
        raise DatasetError("batch_size must be >= 1", details={"batch_size": batch_size})
    bounds = [(start, min(start + batch_size, n)) for start in range(0, n, batch_size)]
    if len(bounds) > 1 and bounds[-1][1] - bounds[-1][0] < min_batch:
        start, _ = bounds[-2]
        bounds = bounds[:-2] + [(start, n)]
    return bounds


def iterate_batches(
    examples: Sequence[Any],
    batch_size: int,
    rng: Optional[RngState] = None,
    pad_id: int = 0,
) -> Iterator[Batch]:
    """Yield collated batches, shuffled when ``rng`` is given."""
    order = rng.permutation(len(examples)) if rng is not None else np.arange(len(examples))
    for start, stop in batch_bounds(len(examples), batch_size):
        yield collate([examples[int(i)] for i in order[start:stop]], pad_id)


def count_batches(n: int, batch_size: int) -> int:
    return len(batch_bounds(n, batch_size))
