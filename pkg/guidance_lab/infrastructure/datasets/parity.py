"""
Parity task: classify a bitstring by whether it holds an even number of ones.

Bits are fed to sequence networks as tokens ``bit + 1`` so that token 0 is
free for padding.
"""
from __future__ import annotations

from typing import Optional, Sequence, Tuple

import numpy as np

from guidance_lab.domain.entities import DatasetSplit, ParityExample
from guidance_lab.domain.exceptions import DatasetError
from guidance_lab.domain.value_objects import TaskName
from guidance_lab.shared.constants import PARITY_CLASSES, PARITY_LEN_RANGE, PARITY_PAD, PARITY_VOCAB
from guidance_lab.shared.core import RngState
from guidance_lab.shared.helpers import get_logger

from .manifest import assemble_split

logger = get_logger(__name__)


def parity_label(bits: Sequence[int]) -> int:
    return 1 - (int(sum(bits)) % 2)


def parity_tokens(bits: Sequence[int]) -> Tuple[int, ...]:
    return tuple(int(b) + 1 for b in bits)


def parity_example(example_id: str, bits: Sequence[int]) -> ParityExample:
    return ParityExample(example_id=example_id, bits=tuple(int(b) for b in bits), label=parity_label(bits))


def gen_parity(n: int, len_range: Optional[Tuple[int, int]] = None, seed: int = 0) -> DatasetSplit:
    """Uniform random bitstrings with lengths uniform in ``len_range``, split 80/10/10."""
    if n < 1:
        raise DatasetError("n must be >= 1", details={"n": n})
    lo, hi = tuple(len_range or PARITY_LEN_RANGE)
    if lo < 1 or lo > hi:
        raise DatasetError("parity len_range needs 1 <= min <= max", details={"len_range": [lo, hi]})
    rng = RngState(seed).child("parity")

    contents = []
    for _ in range(n):
        length = int(rng.integers(lo, hi + 1))
        contents.append(np.asarray(rng.integers(0, 2, size=length), dtype=np.int64).tolist())

    split = assemble_split(
        TaskName.PARITY.value,
        contents,
        parity_example,
        seed,
        meta=(("vocab", PARITY_VOCAB), ("pad", PARITY_PAD), ("classes", PARITY_CLASSES), ("len_range", [lo, hi])),
    )
    logger.info(f"parity: {split.sizes()} examples, lengths in [{lo}, {hi}]")
    return split
