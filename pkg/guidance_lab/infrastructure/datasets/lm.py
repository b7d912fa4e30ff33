"""
Byte-level language modeling windows cut from a plain UTF-8 corpus.
"""
from __future__ import annotations

from pathlib import Path
from typing import Union

from guidance_lab.domain.entities import DatasetSplit, SequenceExample
from guidance_lab.domain.exceptions import DatasetError
from guidance_lab.domain.value_objects import TaskName
from guidance_lab.shared.constants import BYTE_PAD, BYTE_VOCAB, LM_CONTEXT_LEN, LM_MIN_WINDOWS
from guidance_lab.shared.core import RngState
from guidance_lab.shared.helpers import get_logger

from .manifest import assemble_split

logger = get_logger(__name__)


def read_corpus(corpus_path: Union[str, Path]) -> bytes:
    path = Path(corpus_path)
    try:
        raw = path.read_bytes()
        raw.decode("utf-8")
    except OSError as e:
        raise DatasetError(f"cannot read corpus: {path}", details={"error": str(e)}) from e
    except UnicodeDecodeError as e:
        raise DatasetError(f"corpus is not UTF-8: {path}", details={"position": e.start}) from e
    return raw


def _window_example(example_id: str, window: bytes) -> SequenceExample:
    return SequenceExample(
        example_id=example_id,
        input_tokens=tuple(window[:-1]),
        target_tokens=tuple(window[1:]),
        pad_mask=(True,) * (len(window) - 1),
    )


def lm_windows(corpus: bytes, context_len: int) -> list[bytes]:
    """Non-overlapping windows of ``context_len + 1`` bytes; input and target overlap by one shift."""
    count = (len(corpus) - 1) // context_len
    return [corpus[j * context_len:j * context_len + context_len + 1] for j in range(count)]


def build_lm_dataset(
    corpus_path: Union[str, Path],
    context_len: int = LM_CONTEXT_LEN,
    seed: int = 0,
) -> DatasetSplit:
    """Split a corpus into next-byte prediction windows, shuffled by ``seed``."""
    if context_len < 2:
        raise DatasetError("context_len must be >= 2", details={"context_len": context_len})
    corpus = read_corpus(corpus_path)
    if len(corpus) < LM_MIN_WINDOWS * context_len:
        raise DatasetError(
            "corpus too small for the context length",
            details={"bytes": len(corpus), "required": LM_MIN_WINDOWS * context_len},
        )
    windows = lm_windows(corpus, context_len)
    split = assemble_split(
        TaskName.LANGUAGE_MODELING.value,
        windows,
        _window_example,
        seed,
        rng=RngState(seed).child("lm"),
        meta=(("vocab", BYTE_VOCAB), ("pad", BYTE_PAD), ("context_len", context_len)),
    )
    logger.info(f"lm: {len(corpus)} bytes -> {split.sizes()} windows of {context_len}")
    return split
