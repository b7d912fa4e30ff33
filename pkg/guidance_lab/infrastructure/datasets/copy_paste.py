"""
Copy-paste task: read a sequence of digits, then reproduce it after a separator.

Layout per example with content ``s`` of ``k`` tokens::

    input  = s + [SEP] + [PAD] * k
    target = [IGNORE] * (k + 1) + s

so a model emitting one token per position must output ``s`` on the
positions following SEP. Total length counted with the end of the emitted
copy is ``2k + 2``.
"""
from __future__ import annotations

import math
from typing import Optional, Sequence, Tuple

from guidance_lab.domain.entities import DatasetSplit, SequenceExample
from guidance_lab.domain.exceptions import DatasetError
from guidance_lab.domain.value_objects import TaskName
from guidance_lab.shared.constants import COPY_LEN_RANGE, COPY_MIN_VALUE, COPY_PAD, IGNORE_INDEX
from guidance_lab.shared.core import RngState
from guidance_lab.shared.helpers import get_logger

from .manifest import assemble_split

logger = get_logger(__name__)


def copy_tokens(vocab_size: int) -> Tuple[int, int, int]:
    """(pad, sep, vocab) for content values 1..vocab_size."""
    return COPY_PAD, vocab_size + 1, vocab_size + 2


def content_length_bounds(len_range: Tuple[int, int]) -> Tuple[int, int]:
    """Smallest and largest ``k`` with ``2k + 2`` inside ``len_range``."""
    lo, hi = len_range
    if lo > hi or lo < COPY_LEN_RANGE[0] or hi > COPY_LEN_RANGE[1]:
        raise DatasetError(
            f"copy-paste len_range must lie within {list(COPY_LEN_RANGE)}",
            details={"len_range": list(len_range)},
        )
    k_min = max(1, math.ceil((lo - 2) / 2))
    k_max = (hi - 2) // 2
    if k_min > k_max:
        raise DatasetError("copy-paste len_range admits no content length", details={"len_range": list(len_range)})
    return k_min, k_max


def copy_paste_example(example_id: str, content: Sequence[int], vocab_size: int = 10) -> SequenceExample:
    pad, sep, _ = copy_tokens(vocab_size)
    k = len(content)
    if k < 1 or any(not (COPY_MIN_VALUE <= v <= vocab_size) for v in content):
        raise DatasetError("copy-paste content must be non-empty values in 1..vocab_size", details={"id": example_id})
    inputs = tuple(content) + (sep,) + (pad,) * k
    targets = (IGNORE_INDEX,) * (k + 1) + tuple(content)
    return SequenceExample(
        example_id=example_id,
        input_tokens=inputs,
        target_tokens=targets,
        pad_mask=(True,) * len(inputs),
    )


def gen_copy_paste(
    n: int,
    len_range: Optional[Tuple[int, int]] = None,
    vocab_size: int = 10,
    seed: int = 0,
) -> DatasetSplit:
    """Generate ``n`` copy-paste examples split 80/10/10."""
    if n < 1:
        raise DatasetError("n must be >= 1", details={"n": n})
    if vocab_size < 1:
        raise DatasetError("vocab_size must be >= 1", details={"vocab_size": vocab_size})
    len_range = tuple(len_range or COPY_LEN_RANGE)
    k_min, k_max = content_length_bounds(len_range)
    rng = RngState(seed).child("copy_paste")

    contents = []
    for _ in range(n):
        k = int(rng.integers(k_min, k_max + 1))
        contents.append(tuple(int(v) for v in rng.integers(COPY_MIN_VALUE, vocab_size + 1, size=k)))

    _, sep, vocab = copy_tokens(vocab_size)
    split = assemble_split(
        TaskName.COPY_PASTE.value,
        contents,
        lambda example_id, content: copy_paste_example(example_id, content, vocab_size),
        seed,
        meta=(("vocab", vocab), ("sep", sep), ("pad", COPY_PAD), ("len_range", list(len_range))),
    )
    logger.info(f"copy-paste: {split.sizes()} examples, k in [{k_min}, {k_max}]")
    return split
