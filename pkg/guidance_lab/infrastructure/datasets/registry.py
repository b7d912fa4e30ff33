"""
Dataset construction from a DataConfig.
"""
from __future__ import annotations

from pathlib import Path

from guidance_lab.domain.entities import DatasetSplit
from guidance_lab.domain.exceptions import DatasetError
from guidance_lab.domain.value_objects import TaskName
from guidance_lab.infrastructure.config import DataConfig
from guidance_lab.shared.constants import COPY_LEN_RANGE, PARITY_LEN_RANGE

from .copy_paste import gen_copy_paste
from .files import load_dataset
from .images import ImageSynthSpec, load_image_dataset
from .lm import build_lm_dataset
from .parity import gen_parity


def build_dataset(data: DataConfig, task: TaskName) -> DatasetSplit:
    """Load ``data.dataset_dir`` if set, otherwise generate or ingest for ``task``."""
    task = TaskName(task)
    if data.dataset_dir:
        split = load_dataset(data.dataset_dir)
        if split.task != task.value:
            raise DatasetError(
                "saved dataset belongs to another task",
                details={"expected": task.value, "found": split.task},
            )
        return split

    if task == TaskName.COPY_PASTE:
        return gen_copy_paste(data.n, data.len_range or COPY_LEN_RANGE, data.vocab_size, data.seed)
    if task == TaskName.PARITY:
        return gen_parity(data.n, data.len_range or PARITY_LEN_RANGE, data.seed)
    if task == TaskName.LANGUAGE_MODELING:
        if not data.corpus_path:
            raise DatasetError("lm task needs data.corpus_path")
        return build_lm_dataset(Path(data.corpus_path), data.context_len, data.seed)
    if task == TaskName.IMAGES:
        if data.image_path:
            return load_image_dataset(path=data.image_path, seed=data.seed, classes=data.image_classes)
        spec = ImageSynthSpec(
            classes=data.image_classes,
            height=data.image_size,
            width=data.image_size,
            channels=data.image_channels,
            n=data.n,
        )
        return load_image_dataset(synth_spec=spec, seed=data.seed)
    raise DatasetError(f"unknown task: {task}")


def pad_id_for(split: DatasetSplit) -> int:
    return int(split.meta_value("pad", 0))
