"""
Dataset persistence: one file per split plus a manifest.

Sequence tasks are stored as UTF-8 lines ``tokens<TAB>targets`` (space
separated ints), parity as ``bits<TAB>label`` and images as GIMG files.
``manifest.json`` records task, seed, sizes, metadata and the content hash,
which is verified on load.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, List, Union

import numpy as np

from guidance_lab.domain.entities import DatasetSplit, ImageExample, ParityExample, SequenceExample
from guidance_lab.domain.exceptions import DatasetError
from guidance_lab.shared.constants import MANIFEST_FILE
from guidance_lab.shared.helpers import get_logger

from .images import read_image_file, write_image_file
from .manifest import SPLIT_NAMES, manifest_hash
from .parity import parity_example

logger = get_logger(__name__)


def _split_file(directory: Path, name: str, task: str) -> Path:
    return directory / (f"{name}.gimg" if task == "images" else f"{name}.tsv")


def _format_line(example: Any) -> str:
    if isinstance(example, ParityExample):
        return "".join(str(b) for b in example.bits) + f"\t{example.label}"
    if isinstance(example, SequenceExample):
        return " ".join(map(str, example.input_tokens)) + "\t" + " ".join(map(str, example.target_tokens))
    raise DatasetError(f"cannot write example of type {type(example).__name__}")


def _parse_line(task: str, line: str, example_id: str, lineno: int) -> Any:
    try:
        left, right = line.rstrip("\n").split("\t")
        if task == "parity":
            example = parity_example(example_id, [int(ch) for ch in left])
            if example.label != int(right):
                raise ValueError("label contradicts bits")
            return example
        inputs = tuple(int(tok) for tok in left.split())
        targets = tuple(int(tok) for tok in right.split())
        return SequenceExample(example_id, inputs, targets, (True,) * len(inputs))
    except ValueError as e:
        raise DatasetError(f"malformed dataset line {lineno}", details={"id": example_id, "error": str(e)}) from e


def save_dataset(split: DatasetSplit, directory: Union[str, Path]) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name in SPLIT_NAMES:
        part = split.part(name)
        target = _split_file(directory, name, split.task)
        if split.task == "images":
            pixels = np.stack([ex.pixels for ex in part]) if part else np.zeros((0, 1, 1, 1))
            write_image_file(target, pixels, np.asarray([ex.label for ex in part], dtype=np.int64))
        else:
            with open(target, "w", encoding="utf-8") as f:
                for example in part:
                    f.write(_format_line(example) + "\n")

    manifest = {
        "task": split.task,
        "seed": split.seed,
        "sizes": dict(zip(SPLIT_NAMES, split.sizes())),
        "manifest_hash": split.manifest_hash,
        "meta": dict(split.meta),
    }
    with open(directory / MANIFEST_FILE, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2)
    logger.info(f"Saved {split.task} dataset to {directory}")
    return directory


def load_dataset(directory: Union[str, Path]) -> DatasetSplit:
    """Read a saved dataset and check it against its manifest hash."""
    directory = Path(directory)
    try:
        with open(directory / MANIFEST_FILE, encoding="utf-8") as f:
            manifest = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise DatasetError(f"cannot read dataset manifest in {directory}", details={"error": str(e)}) from e

    task = manifest["task"]
    parts: List[tuple] = []
    for name in SPLIT_NAMES:
        source = _split_file(directory, name, task)
        if task == "images":
            pixels, labels = read_image_file(source)
            parts.append(tuple(
                ImageExample(f"{name}-{i:06d}", pixels[i], int(labels[i])) for i in range(len(labels))
            ))
            continue
        try:
            with open(source, encoding="utf-8") as f:
                lines = [line for line in f if line.strip()]
        except OSError as e:
            raise DatasetError(f"cannot read {source}", details={"error": str(e)}) from e
        parts.append(tuple(
            _parse_line(task, line, f"{name}-{i:06d}", i + 1) for i, line in enumerate(lines)
        ))

    digest = manifest_hash(task, parts)
    if digest != manifest.get("manifest_hash"):
        raise DatasetError(
            "dataset content does not match its manifest hash",
            details={"directory": str(directory), "expected": manifest.get("manifest_hash"), "actual": digest},
        )
    return DatasetSplit(
        task=task,
        train=parts[0],
        val=parts[1],
        test=parts[2],
        seed=int(manifest.get("seed", 0)),
        manifest_hash=digest,
        meta=tuple(manifest.get("meta", {}).items()),
    )
