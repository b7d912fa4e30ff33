"""
Convolutional networks with and without residual connections.

Both families share one parameter layout: a 3x3 stem, ``depth`` blocks of
3x3 conv -> batch norm, global average pooling and a linear head. A plain
block computes act(branch(x)); a residual block computes act(branch(x) + x).
"""
from __future__ import annotations

from typing import Any, List, Optional, Tuple

import numpy as np

from guidance_lab.domain.value_objects import NetworkFamily
from guidance_lab.infrastructure.config.schemas import NetworkSpec
from guidance_lab.infrastructure.networks.base import (
    BufferSpec,
    Network,
    ParamSpec,
    Taps,
    norm_buffer_specs,
    norm_param_specs,
)
from guidance_lab.infrastructure.networks.layers import activate, linear, linear_specs
from guidance_lab.shared.constants import CONV_KERNEL
from guidance_lab.shared.core import Tensor, batch_norm, conv2d


class ConvNetwork(Network):
    """Taps ``stem``, ``block{i}`` (pre-activation) and ``head``."""

    families = (NetworkFamily.PLAIN_CNN, NetworkFamily.RES_CNN)

    @classmethod
    def _conv_specs(cls, prefix: str, in_channels: int, spec: NetworkSpec) -> List[ParamSpec]:
        fan_in = in_channels * CONV_KERNEL * CONV_KERNEL
        specs = [ParamSpec(f"{prefix}.conv.weight", (spec.width, in_channels, CONV_KERNEL, CONV_KERNEL), "weight", fan_in)]
        if spec.batch_norm:
            specs += norm_param_specs(f"{prefix}.bn", spec.width)
        else:
            specs.append(ParamSpec(f"{prefix}.conv.bias", (spec.width,), "bias"))
        return specs

    @classmethod
    def _layer_names(cls, spec: NetworkSpec) -> List[str]:
        return ["stem"] + [f"block{i}" for i in range(1, spec.depth + 1)]

    @classmethod
    def param_specs(cls, spec: NetworkSpec) -> List[ParamSpec]:
        specs = cls._conv_specs("stem", spec.input_shape[0], spec)
        for i in range(1, spec.depth + 1):
            specs += cls._conv_specs(f"block{i}", spec.width, spec)
        specs += linear_specs("head", spec.width, spec.classes)
        return specs

    @classmethod
    def buffer_specs(cls, spec: NetworkSpec) -> List[BufferSpec]:
        if not spec.batch_norm:
            return []
        specs: List[BufferSpec] = []
        for name in cls._layer_names(spec):
            specs += norm_buffer_specs(f"{name}.bn", spec.width)
        return specs

    @classmethod
    def tap_names(cls, spec: NetworkSpec) -> List[str]:
        return cls._layer_names(spec) + ["head"]

    def _check_input(self, inputs: Any, pad_mask: Optional[np.ndarray]) -> Tuple[Tensor, None]:
        return self._continuous_input(inputs), None

    def _conv_bn(self, x: Tensor, prefix: str) -> Tensor:
        bias = None if self.spec.batch_norm else self.p(f"{prefix}.conv.bias")
        h = conv2d(x, self.p(f"{prefix}.conv.weight"), bias, stride=1, padding=CONV_KERNEL // 2)
        if self.spec.batch_norm:
            h = batch_norm(
                h,
                self.p(f"{prefix}.bn.gamma"),
                self.p(f"{prefix}.bn.beta"),
                self.buffer(f"{prefix}.bn.running_mean"),
                self.buffer(f"{prefix}.bn.running_var"),
                mode=self.mode,
            )
        return h

    def _forward(self, x: Tensor, pad_mask: Optional[np.ndarray], taps: Taps) -> Tensor:
        h = self._conv_bn(x, "stem")
        taps.append(("stem", h))
        x = activate(h, self.spec.activation)
        for i in range(1, self.spec.depth + 1):
            h = self._conv_bn(x, f"block{i}")
            if self.spec.has_skip:
                h = h + x
            taps.append((f"block{i}", h))
            x = activate(h, self.spec.activation)
        logits = linear(x.mean(axis=(2, 3)), self._params, "head")
        taps.append(("head", logits))
        return logits
