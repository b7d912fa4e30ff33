"""
Content hashing and splitting shared by all dataset generators.
"""
from __future__ import annotations

import hashlib
import json
from typing import Any, Callable, Iterable, List, Sequence, Tuple

import numpy as np

from guidance_lab.domain.entities import DatasetSplit, ImageExample, ParityExample, SequenceExample
from guidance_lab.shared.core import RngState

SPLIT_NAMES = ("train", "val", "test")


def split_sizes(n: int) -> Tuple[int, int, int]:
    """80/10/10 with the remainder going to test."""
    n_train = n * 8 // 10
    n_val = n // 10
    return n_train, n_val, n - n_train - n_val


def _example_payload(example: Any) -> Any:
    if isinstance(example, SequenceExample):
        return [list(example.input_tokens), list(example.target_tokens), [int(m) for m in example.pad_mask]]
    if isinstance(example, ParityExample):
        return ["".join(str(b) for b in example.bits), example.label]
    if isinstance(example, ImageExample):
        pixels = np.asarray(example.pixels)
        quantized = np.rint(pixels * 255.0).astype(np.uint8)
        return [list(pixels.shape), hashlib.sha256(quantized.tobytes()).hexdigest(), example.label]
    raise TypeError(f"cannot hash example of type {type(example).__name__}")


def manifest_hash(task: str, parts: Sequence[Sequence[Any]]) -> str:
    """SHA-256 over task name and every example's content, split by split, in order."""
    digest = hashlib.sha256(task.encode("utf-8"))
    for name, part in zip(SPLIT_NAMES, parts):
        digest.update(f"|{name}:{len(part)}|".encode("utf-8"))
        for example in part:
            digest.update(json.dumps(_example_payload(example), separators=(",", ":")).encode("utf-8"))
            digest.update(b"\n")
    return digest.hexdigest()


def assemble_split(
    task: str,
    contents: Sequence[Any],
    make_example: Callable[[str, Any], Any],
    seed: int,
    rng: RngState | None = None,
    meta: Iterable[Tuple[str, Any]] = (),
) -> DatasetSplit:
    """
    Partition ``contents`` 80/10/10 and wrap them as examples.

    When ``rng`` is given the order is permuted first. Ids are
    ``{split}-{index:06d}``, so they are reproducible from file contents.
    """
    order = rng.permutation(len(contents)) if rng is not None else np.arange(len(contents))
    n_train, n_val, _ = split_sizes(len(contents))
    bounds = (0, n_train, n_train + n_val, len(contents))
    parts: List[Tuple[Any, ...]] = []
    for index, name in enumerate(SPLIT_NAMES):
        indices = order[bounds[index]:bounds[index + 1]]
        parts.append(tuple(make_example(f"{name}-{j:06d}", contents[int(i)]) for j, i in enumerate(indices)))
    return DatasetSplit(
        task=task,
        train=parts[0],
        val=parts[1],
        test=parts[2],
        seed=seed,
        manifest_hash=manifest_hash(task, parts),
        meta=tuple(meta),
    )
