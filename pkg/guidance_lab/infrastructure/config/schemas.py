"""Pydantic schemas for experiment configuration files."""
from __future__ import annotations

from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from guidance_lab.domain.exceptions import ConfigError, SpecError
from guidance_lab.domain.value_objects import (
    Activation,
    GuideInput,
    GuideMode,
    MetricName,
    NetworkFamily,
    OptimizerName,
    Readout,
    TaskLossName,
    TaskName,
)
from guidance_lab.shared.constants import (
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPS,
    DESK_BATCH_SIZE,
    DESK_EPOCHS,
    DESK_SEEDS,
    SWEEP_SIZE,
)


class NetworkSpec(BaseModel):
    """
    Declarative architecture description.

    ``vocab`` is the input token vocabulary of sequence families;
    ``classes`` is the output size (vocabulary size for per-token heads).
    ``residual`` only carries meaning for the cnn families.
    """
    model_config = ConfigDict(
        extra="forbid",
        frozen=True,
        json_schema_extra={
            "examples": [{
                "family": "fcn",
                "depth": 2,
                "width": 8,
                "classes": 3,
                "input_shape": [4],
                "batch_norm": True,
            }]
        },
    )

    family: NetworkFamily
    depth: int
    width: int
    classes: int
    heads: int = 1
    residual: Optional[bool] = None
    activation: Activation = Activation.RELU
    vocab: Optional[int] = None
    context_len: Optional[int] = None
    patch_size: Optional[int] = None
    input_shape: Optional[Tuple[int, ...]] = None
    batch_norm: bool = True
    readout: Readout = Readout.PER_TOKEN

    @model_validator(mode="after")
    def _check_invariants(self) -> "NetworkSpec":
        family = self.family
        problems: List[str] = []
        if self.depth < 1:
            problems.append("depth must be >= 1")
        if self.width < 1:
            problems.append("width must be >= 1")
        if self.classes < 1:
            problems.append("classes must be >= 1")
        if self.heads < 1 or self.width % max(self.heads, 1) != 0:
            problems.append(f"heads ({self.heads}) must divide width ({self.width})")
        if family.is_cnn:
            expected = family == NetworkFamily.RES_CNN
            if self.residual is not None and self.residual != expected:
                problems.append(f"{family} requires residual={expected}")
        elif self.residual is False:
            problems.append("residual=false is only meaningful for cnn families")
        if family.is_sequence:
            if self.context_len is None or self.context_len < 2:
                problems.append("sequence families need context_len >= 2")
            if self.vocab is None or self.vocab < 2:
                problems.append("sequence families need vocab >= 2")
        else:
            if not self.input_shape or any(d < 1 for d in self.input_shape):
                problems.append(f"{family} needs a positive input_shape")
            elif (family.is_cnn or family == NetworkFamily.PATCH_VIT) and len(self.input_shape) != 3:
                problems.append(f"{family} needs input_shape (C, H, W)")
        if family == NetworkFamily.PATCH_VIT:
            p = self.patch_size
            if p is None or p < 1:
                problems.append("patch_vit needs patch_size >= 1")
            elif self.input_shape and len(self.input_shape) == 3 and (
                self.input_shape[1] % p or self.input_shape[2] % p
            ):
                problems.append(f"patch_size {p} must divide the image height and width")
        if problems:
            raise SpecError("invalid network spec", details={"family": str(family), "problems": problems})
        return self

    @property
    def has_skip(self) -> bool:
        return self.family == NetworkFamily.RES_CNN

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


class GuidanceConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    guide_mode: GuideMode = GuideMode.NONE
    guide_input: GuideInput = GuideInput.SAME
    disconnect_after_steps: Optional[int] = None
    metric: MetricName = MetricName.CKA
    loss_weight: float = 1.0
    # named subsets of the tap lists, in tap order; None uses every tap
    guide_taps: Optional[List[str]] = None
    target_taps: Optional[List[str]] = None

    @model_validator(mode="after")
    def _check(self) -> "GuidanceConfig":
        if self.disconnect_after_steps is not None and self.disconnect_after_steps < 1:
            raise ConfigError("disconnect_after_steps must be >= 1", details={"value": self.disconnect_after_steps})
        if self.loss_weight != 1.0:
            raise ConfigError("the dissimilarity term is unweighted; loss_weight must be 1")
        for field_name in ("guide_taps", "target_taps"):
            names = getattr(self, field_name)
            if names is not None and (not names or len(set(names)) != len(names)):
                raise ConfigError(f"{field_name} must be a non-empty list of distinct tap names", details={field_name: names})
        return self

    @property
    def enabled(self) -> bool:
        return self.guide_mode != GuideMode.NONE

    @property
    def effective_input(self) -> GuideInput:
        return GuideInput.NOISE if self.guide_mode == GuideMode.NOISE else self.guide_input


class OptimizerConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: OptimizerName = OptimizerName.ADAM
    weight_decay: Optional[float] = None
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS


class DataConfig(BaseModel):
    """Where examples come from; which keys matter depends on the task."""
    model_config = ConfigDict(extra="forbid")

    n: int = 20000
    seed: int = 0
    len_range: Optional[Tuple[int, int]] = None
    vocab_size: int = 10
    context_len: int = 50
    corpus_path: Optional[str] = None
    image_path: Optional[str] = None
    image_classes: int = 4
    image_size: int = 16
    image_channels: int = 1
    dataset_dir: Optional[str] = None


class ExperimentConfig(BaseModel):
    """Full description of one experiment: task, networks, guidance and schedule."""
    model_config = ConfigDict(extra="forbid")

    experiment_id: str = Field(..., min_length=1)
    task: TaskName
    data: DataConfig = Field(default_factory=DataConfig)
    target_spec: NetworkSpec
    guide_spec: Optional[NetworkSpec] = None
    guide_checkpoint: Optional[str] = None
    guidance: GuidanceConfig = Field(default_factory=GuidanceConfig)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    lr: float
    batch_size: int = DESK_BATCH_SIZE
    epochs: int = DESK_EPOCHS
    seeds: List[int] = Field(default_factory=lambda: list(DESK_SEEDS))
    grad_clip: Optional[float] = None
    task_loss: TaskLossName = TaskLossName.CROSS_ENTROPY
    accumulate_steps: int = 1
    record_wall_time: bool = False
    output_dir: Optional[str] = None
    sweep_lrs: Optional[List[float]] = None
    sweep_size: int = SWEEP_SIZE

    @model_validator(mode="after")
    def _check(self) -> "ExperimentConfig":
        problems: List[str] = []
        if not self.seeds:
            problems.append("seeds must be non-empty")
        if len(set(self.seeds)) != len(self.seeds):
            problems.append("seeds must be unique")
        if self.lr <= 0:
            problems.append("lr must be > 0")
        if self.batch_size < 1 or self.epochs < 1 or self.accumulate_steps < 1:
            problems.append("batch_size, epochs and accumulate_steps must be >= 1")
        if self.grad_clip is not None and self.grad_clip <= 0:
            problems.append("grad_clip must be > 0")
        if self.guidance.enabled:
            if self.guide_spec is None:
                problems.append(f"guide_mode={self.guidance.guide_mode} needs guide_spec")
            if self.guidance.guide_mode == GuideMode.TRAINED and not self.guide_checkpoint:
                problems.append("guide_mode=trained needs guide_checkpoint")
        elif self.guide_spec is not None or self.guide_checkpoint is not None:
            problems.append("guide_spec/guide_checkpoint given but guide_mode is none")
        elif self.guidance.guide_taps is not None or self.guidance.target_taps is not None:
            problems.append("guide_taps/target_taps given but guide_mode is none")
        if self.task_loss == TaskLossName.BCE and self.target_spec.classes != 1:
            problems.append("bce task loss needs a single-logit head (classes=1)")
        if self.task_loss != TaskLossName.BCE and self.target_spec.classes < 2:
            problems.append(f"{self.task_loss} needs classes >= 2")
        if self.sweep_size < 1:
            problems.append("sweep_size must be >= 1")
        if problems:
            raise ConfigError("invalid experiment config", details={"experiment": self.experiment_id, "problems": problems})
        return self

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")
