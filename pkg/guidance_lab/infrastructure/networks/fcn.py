"""
Fully-connected network: blocks of linear -> batch norm -> activation, then a linear head.
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
from guidance_lab.shared.core import Tensor, batch_norm


class FullyConnectedNetwork(Network):
    """
    Taps ``block{i}`` (after the block's batch norm, before its activation)
    and ``head`` (logits). Image inputs are flattened.
    """

    families = (NetworkFamily.FCN,)

    @staticmethod
    def _in_features(spec: NetworkSpec) -> int:
        return int(np.prod(spec.input_shape))

    @classmethod
    def param_specs(cls, spec: NetworkSpec) -> List[ParamSpec]:
        specs: List[ParamSpec] = []
        fan_in = cls._in_features(spec)
        for i in range(1, spec.depth + 1):
            specs += linear_specs(f"block{i}", fan_in, spec.width)
            if spec.batch_norm:
                specs += norm_param_specs(f"block{i}.bn", spec.width)
            fan_in = spec.width
        specs += linear_specs("head", spec.width, spec.classes)
        return specs

    @classmethod
    def buffer_specs(cls, spec: NetworkSpec) -> List[BufferSpec]:
        if not spec.batch_norm:
            return []
        specs: List[BufferSpec] = []
        for i in range(1, spec.depth + 1):
            specs += norm_buffer_specs(f"block{i}.bn", spec.width)
        return specs

    @classmethod
    def tap_names(cls, spec: NetworkSpec) -> List[str]:
        return [f"block{i}" for i in range(1, spec.depth + 1)] + ["head"]

    def _check_input(self, inputs: Any, pad_mask: Optional[np.ndarray]) -> Tuple[Tensor, None]:
        return self._continuous_input(inputs), None

    def _forward(self, x: Tensor, pad_mask: Optional[np.ndarray], taps: Taps) -> Tensor:
        x = x.reshape(x.shape[0], -1)
        for i in range(1, self.spec.depth + 1):
            h = linear(x, self._params, f"block{i}")
            if self.spec.batch_norm:
                h = batch_norm(
                    h,
                    self.p(f"block{i}.bn.gamma"),
                    self.p(f"block{i}.bn.beta"),
                    self.buffer(f"block{i}.bn.running_mean"),
                    self.buffer(f"block{i}.bn.running_var"),
                    mode=self.mode,
                )
            taps.append((f"block{i}", h))
            x = activate(h, self.spec.activation)
        logits = linear(x, self._params, "head")
        taps.append(("head", logits))
        return logits
