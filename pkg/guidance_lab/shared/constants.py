"""
Numeric defaults and file-format constants.

Defaults without an external reference are decisions, documented in
docs/CONFIG.md.
"""
from typing import Final, Tuple

# ========== NORMALIZATION ==========
BATCH_NORM_EPS: Final[float] = 1e-5
BATCH_NORM_MOMENTUM: Final[float] = 0.1
LAYER_NORM_EPS: Final[float] = 1e-5

# ========== OPTIMIZATION ==========
ADAM_BETA1: Final[float] = 0.9
ADAM_BETA2: Final[float] = 0.999
ADAM_EPS: Final[float] = 1e-8
ADAMW_WEIGHT_DECAY: Final[float] = 0.01
ADAM_WEIGHT_DECAY: Final[float] = 0.0

# ========== HARNESS ==========
DESK_BATCH_SIZE: Final[int] = 64
DESK_EPOCHS: Final[int] = 30
DESK_SEEDS: Final[Tuple[int, ...]] = (0, 1, 2)
SWEEP_SIZE: Final[int] = 5
SWEEP_EPOCH_FRACTION: Final[float] = 0.25
SWEEP_MULTIPLIERS: Final[Tuple[float, ...]] = (0.1, 0.3, 1.0, 3.0, 10.0)

# ========== METRICS ==========
MIN_METRIC_BATCH: Final[int] = 3
ATTENTION_MASK_VALUE: Final[float] = -1e9

# ========== NETWORKS ==========
FFN_MULTIPLIER: Final[int] = 4
CONV_KERNEL: Final[int] = 3

# ========== TOKENS ==========
IGNORE_INDEX: Final[int] = -100

COPY_PAD: Final[int] = 0
COPY_SEP: Final[int] = 11
COPY_VOCAB: Final[int] = 12
COPY_MIN_VALUE: Final[int] = 1
COPY_MAX_VALUE: Final[int] = 10

PARITY_PAD: Final[int] = 0
PARITY_VOCAB: Final[int] = 3
PARITY_CLASSES: Final[int] = 2

BYTE_PAD: Final[int] = 256
BYTE_VOCAB: Final[int] = 257

# ========== DATASETS ==========
COPY_LEN_RANGE: Final[Tuple[int, int]] = (20, 40)
PARITY_LEN_RANGE: Final[Tuple[int, int]] = (2, 50)
LM_CONTEXT_LEN: Final[int] = 50
LM_MIN_WINDOWS: Final[int] = 10
IMAGE_SHAPES: Final[Tuple[str, ...]] = (
    "square",
    "disk",
    "triangle",
    "cross",
    "ring",
    "hbar",
    "vbar",
    "diamond",
)
IMAGE_NOISE_STD: Final[float] = 0.05
MANIFEST_FILE: Final[str] = "manifest.json"

# ========== FILE FORMATS ==========
CHECKPOINT_MAGIC: Final[bytes] = b"GLAB"
CHECKPOINT_VERSION: Final[int] = 1
IMAGE_MAGIC: Final[bytes] = b"GIMG"
IMAGE_VERSION: Final[int] = 1

LOG_COLUMNS: Final[Tuple[str, ...]] = (
    "experiment_id",
    "seed",
    "epoch",
    "step",
    "split",
    "total_loss",
    "task_loss",
    "dissim_loss",
    "metric",
    "lr",
    "wall_ms",
)

# ========== ENVIRONMENT VARIABLES ==========

class EnvironmentVariables:
    OUTPUT_DIR: Final[str] = "GUIDANCE_LAB_OUTPUT_DIR"
    DATA_DIR: Final[str] = "GUIDANCE_LAB_DATA_DIR"
    LOG_LEVEL: Final[str] = "GUIDANCE_LAB_LOG_LEVEL"
    RUN_SLOW: Final[str] = "GUIDANCE_LAB_RUN_SLOW"

    DEFAULT_OUTPUT_DIR: Final[str] = "runs"
    DEFAULT_DATA_DIR: Final[str] = "data"
