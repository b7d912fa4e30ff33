"""
Dataset generation, ingestion, persistence and batching.
"""
from .batching import Batch, batch_bounds, collate, count_batches, iterate_batches
from .copy_paste import copy_paste_example, copy_tokens, gen_copy_paste
from .files import load_dataset, save_dataset
from .images import (
    ImageSynthSpec,
    generate_images,
    load_image_dataset,
    read_image_file,
    write_image_file,
)
from .lm import build_lm_dataset
from .manifest import assemble_split, manifest_hash, split_sizes
from .parity import gen_parity, parity_example, parity_label, parity_tokens
from .registry import build_dataset, pad_id_for

__all__ = [
    "Batch",
    "batch_bounds",
    "collate",
    "count_batches",
    "iterate_batches",
    "copy_paste_example",
    "copy_tokens",
    "gen_copy_paste",
    "load_dataset",
    "save_dataset",
    "ImageSynthSpec",
    "generate_images",
    "load_image_dataset",
    "read_image_file",
    "write_image_file",
    "build_lm_dataset",
    "assemble_split",
    "manifest_hash",
    "split_sizes",
    "gen_parity",
    "parity_example",
    "parity_label",
    "parity_tokens",
    "build_dataset",
    "pad_id_for",
]
