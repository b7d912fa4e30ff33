"""
Guidance loss: layer mapping, activation flattening, guide inputs and the
combined objective ``task_loss + sum of per-layer dissimilarities``.

The guide network contributes constants only: its forward pass runs with
gradient recording disabled and its activations are detached before they
reach the metric.
"""
from __future__ import annotations

from dataclasses import replace
from fractions import Fraction
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np

from guidance_lab.application.interfaces import DissimilarityMetric, NetworkInterface
from guidance_lab.domain.entities import ActivationRecord, GuidedLossBreakdown, LayerMapping
from guidance_lab.domain.exceptions import ConfigError, DegenerateBatchError, ShapeError, UnsupportedMappingError
from guidance_lab.domain.value_objects import GuideInput
from guidance_lab.infrastructure.metrics import ActivationMatrix, get_metric
from guidance_lab.shared.constants import MIN_METRIC_BATCH
from guidance_lab.shared.core import RngState, Tensor, as_tensor, get_default_dtype, no_grad
from guidance_lab.shared.helpers import get_logger

logger = get_logger(__name__)


def compute_layer_mapping(t: int, l: int) -> LayerMapping:
    """
    Spread ``l`` guide taps evenly over ``t`` target taps.

    Guide tap ``i`` (zero-based) maps to round_half_up(i * (t - 1) / (l - 1)),
    clamped to [0, t - 1]; a single guide tap maps to the last target tap.
    """
    if t < 1 or l < 1:
        raise UnsupportedMappingError("both networks need at least one tap", details={"t": t, "l": l})
    if l > t:
        raise UnsupportedMappingError(
            "guide has more taps than target", details={"t": t, "l": l}
        )
    if l == 1:
        return LayerMapping(t=t, l=1, step=Fraction(1), pairs=((0, t - 1),))

    step = Fraction(t - 1, l - 1)
    pairs = []
    for i in range(l):
        # floor(i * step + 1/2) in exact integer arithmetic
        target = (2 * i * (t - 1) + (l - 1)) // (2 * (l - 1))
        pairs.append((i, min(max(target, 0), t - 1)))
    return LayerMapping(t=t, l=l, step=step, pairs=tuple(pairs))


def flatten_activation(raw: Any, pad_mask: Any = None, layer_name: str = "", network_tag: str = "target") -> ActivationMatrix:
    """
    Reshape a tap activation to b x d.

    b x C x H x W -> b x (C*H*W); b x T x d -> b x (T*d) with padded
    positions zeroed; 2-D input passes through.
    """
    values = as_tensor(raw)
    if values.ndim == 2:
        return ActivationMatrix(values, layer_name, network_tag)
    if values.ndim == 3 and pad_mask is not None:
        mask = np.asarray(pad_mask, dtype=bool)
        if mask.shape != values.shape[:2]:
            raise ShapeError(
                "pad_mask does not match activation", details={"mask": mask.shape, "activation": values.shape}
            )
        if not mask.all():
            values = values * mask[:, :, None].astype(values.dtype)
    elif values.ndim < 2:
        raise ShapeError("activation needs a batch axis and features", details={"shape": values.shape})
    return ActivationMatrix(values.reshape(values.shape[0], -1), layer_name, network_tag)


def guide_batch(batch: Any, mode: GuideInput, rng: Optional[RngState] = None, token_vocab: Optional[int] = None) -> Any:
    """
    Input for the guide network.

    SAME returns ``batch`` itself. NOISE replaces the inputs with standard
    normal draws of the same shape, or with uniform valid token ids in
    [0, token_vocab) when the inputs are tokens.
    """
    mode = GuideInput(mode)
    if mode == GuideInput.SAME:
        return batch
    if rng is None:
        raise ConfigError("noise guide input needs an RngState")

    inputs = np.asarray(getattr(batch, "inputs", batch))
    if np.issubdtype(inputs.dtype, np.integer):
        if token_vocab is None:
            raise ConfigError("token inputs need token_vocab for noise", details={"shape": inputs.shape})
        noise = rng.integers(0, token_vocab, size=inputs.shape).astype(inputs.dtype)
    else:
        noise = rng.standard_normal(inputs.shape).astype(get_default_dtype())
    if hasattr(batch, "inputs"):
        return replace(batch, inputs=noise)
    return noise


def guided_loss(
    task_loss: Tensor,
    target_rec: ActivationRecord,
    guide_rec: ActivationRecord,
    mapping: LayerMapping,
    metric: DissimilarityMetric,
) -> GuidedLossBreakdown:
    """
    Task loss plus the dissimilarity of every mapped (guide, target) tap pair.

    With an empty mapping the breakdown's ``total`` is ``task_loss`` itself.
    """
    if mapping.is_empty:
        zero = Tensor(np.zeros((), dtype=task_loss.dtype))
        return GuidedLossBreakdown(task_loss=task_loss, dissimilarity_total=zero, total=task_loss)
    if len(target_rec) != mapping.t or len(guide_rec) != mapping.l:
        raise ShapeError(
            "activation records do not match the layer mapping",
            details={"target_taps": len(target_rec), "guide_taps": len(guide_rec), "t": mapping.t, "l": mapping.l},
        )

    per_layer: List[Tuple[Tuple[int, int], Tensor]] = []
    total_dissim: Optional[Tensor] = None
    for guide_index, target_index in mapping.pairs:
        target_name, target_raw = target_rec[target_index]
        guide_name, guide_raw = guide_rec[guide_index]
        target_act = flatten_activation(target_raw, target_rec.pad_mask, target_name, "target")
        guide_act = flatten_activation(as_tensor(guide_raw).detach(), guide_rec.pad_mask, guide_name, "guide")
        if target_act.batch_size != guide_act.batch_size:
            raise ShapeError(
                "target and guide batch sizes differ",
                details={"target": target_act.batch_size, "guide": guide_act.batch_size},
            )
        if target_act.batch_size < MIN_METRIC_BATCH:
            raise DegenerateBatchError(
                f"guided loss needs at least {MIN_METRIC_BATCH} samples", details={"b": target_act.batch_size}
            )
        value = metric.dissimilarity(target_act, guide_act)
        per_layer.append(((guide_index, target_index), value))
        total_dissim = value if total_dissim is None else total_dissim + value

    return GuidedLossBreakdown(
        task_loss=task_loss,
        dissimilarity_total=total_dissim,
        total=task_loss + total_dissim,
        per_layer=tuple(per_layer),
    )


def select_taps(tap_list: Sequence[str], names: Optional[Sequence[str]], role: str) -> Tuple[str, ...]:
    """
    The taps that take part in the mapping: ``names`` when given, else all.

    A selection must name existing taps in their forward order, so the
    mapping stays monotone.
    """
    tap_list = tuple(tap_list)
    if names is None:
        return tap_list
    unknown = [name for name in names if name not in tap_list]
    if unknown:
        raise ConfigError(f"unknown {role} taps", details={"unknown": unknown, "available": list(tap_list)})
    positions = [tap_list.index(name) for name in names]
    if positions != sorted(positions) or len(set(positions)) != len(positions):
        raise ConfigError(f"{role} taps must follow forward order", details={"taps": list(names)})
    return tuple(names)


class GuidanceService:
    """
    Per-run guidance state: the frozen guide, its layer mapping and metric,
    the guide-input mode and the early-disconnect step budget.

    ``target_taps`` is the target's tap list, or just its length when every
    tap takes part. ``guide_tap_names`` / ``target_tap_names`` restrict the
    mapping to named taps (a sparse mapping).
    """

    def __init__(
        self,
        guide: Optional[NetworkInterface],
        target_taps: Union[int, Sequence[str]],
        metric: DissimilarityMetric | str = "cka",
        guide_input: GuideInput = GuideInput.SAME,
        disconnect_after_steps: Optional[int] = None,
        noise_rng: Optional[RngState] = None,
        token_vocab: Optional[int] = None,
        guide_tap_names: Optional[Sequence[str]] = None,
        target_tap_names: Optional[Sequence[str]] = None,
    ):
        self.guide = guide
        self.metric = get_metric(metric) if isinstance(metric, str) else metric
        self.guide_input = GuideInput(guide_input)
        self.disconnect_after_steps = disconnect_after_steps
        self.noise_rng = noise_rng
        self.token_vocab = token_vocab
        self.guide_taps: Optional[Tuple[str, ...]] = None
        self.target_taps: Optional[Tuple[str, ...]] = None
        if guide is None:
            self.mapping = LayerMapping.empty()
            return

        if target_tap_names is not None:
            if isinstance(target_taps, int):
                raise ConfigError("target tap names need the target tap list")
            self.target_taps = select_taps(target_taps, target_tap_names, "target")
        if guide_tap_names is not None:
            self.guide_taps = select_taps(guide.tap_list, guide_tap_names, "guide")
        t = len(self.target_taps) if self.target_taps else (
            target_taps if isinstance(target_taps, int) else len(target_taps)
        )
        l = len(self.guide_taps) if self.guide_taps else len(guide.tap_list)
        self.mapping = compute_layer_mapping(t, l)
        logger.info(f"Guidance enabled: {self.mapping} metric={self.metric.name}")

    @property
    def enabled(self) -> bool:
        return not self.mapping.is_empty

    def is_active(self, step: int) -> bool:
        """Whether the dissimilarity term applies at 1-based global ``step``."""
        if not self.enabled:
            return False
        return self.disconnect_after_steps is None or step <= self.disconnect_after_steps

    def guide_record(self, batch: Any) -> ActivationRecord:
        guide_in = guide_batch(batch, self.guide_input, self.noise_rng, self.token_vocab)
        with no_grad():
            _, record = self.guide.forward_with_taps(
                getattr(guide_in, "inputs", guide_in), getattr(guide_in, "pad_mask", None)
            )
        return record.select(self.guide_taps) if self.guide_taps else record

    def loss(self, task_loss: Tensor, target_rec: ActivationRecord, batch: Any, step: int) -> GuidedLossBreakdown:
        if not self.is_active(step):
            return guided_loss(task_loss, target_rec, ActivationRecord(), LayerMapping.empty(), self.metric)
        if self.target_taps:
            target_rec = target_rec.select(self.target_taps)
        return guided_loss(task_loss, target_rec, self.guide_record(batch), self.mapping, self.metric)
