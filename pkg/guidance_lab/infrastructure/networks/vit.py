"""
Patch vision transformer: non-overlapping patches -> linear embedding ->
encoder blocks -> mean-pooled linear head.
"""
from __future__ import annotations

from typing import Any, List, Optional, Tuple

import numpy as np

from guidance_lab.domain.value_objects import NetworkFamily
from guidance_lab.infrastructure.config.schemas import NetworkSpec
from guidance_lab.infrastructure.networks.base import Network, ParamSpec, Taps
from guidance_lab.infrastructure.networks.layers import (
    linear,
    linear_specs,
    transformer_block,
    transformer_block_tap_names,
    transformer_block_specs,
)
from guidance_lab.shared.core import Tensor


class PatchViT(Network):
    """Taps ``patch_embed``, the five sub-layer taps of every block, then ``head``."""

    families = (NetworkFamily.PATCH_VIT,)

    @staticmethod
    def _geometry(spec: NetworkSpec) -> Tuple[int, int]:
        c, h, w = spec.input_shape
        p = spec.patch_size
        return (h // p) * (w // p), c * p * p

    @classmethod
    def param_specs(cls, spec: NetworkSpec) -> List[ParamSpec]:
        patches, patch_dim = cls._geometry(spec)
        specs = linear_specs("patch", patch_dim, spec.width)
        specs.append(ParamSpec("pos.weight", (patches, spec.width), "embedding"))
        for i in range(1, spec.depth + 1):
            specs += transformer_block_specs(f"block{i}", spec.width)
        specs += linear_specs("head", spec.width, spec.classes)
        return specs

    @classmethod
    def tap_names(cls, spec: NetworkSpec) -> List[str]:
        names = ["patch_embed"]
        for i in range(1, spec.depth + 1):
            names += transformer_block_tap_names(f"block{i}")
        return names + ["head"]

    def _check_input(self, inputs: Any, pad_mask: Optional[np.ndarray]) -> Tuple[Tensor, None]:
        return self._continuous_input(inputs), None

    def _forward(self, x: Tensor, pad_mask: Optional[np.ndarray], taps: Taps) -> Tensor:
        b, c, h, w = x.shape
        p = self.spec.patch_size
        patches = (
            x.reshape(b, c, h // p, p, w // p, p)
            .transpose(0, 2, 4, 1, 3, 5)
            .reshape(b, (h // p) * (w // p), c * p * p)
        )
        tokens = linear(patches, self._params, "patch") + self.p("pos.weight")
        taps.append(("patch_embed", tokens))
        for i in range(1, self.spec.depth + 1):
            tokens = transformer_block(tokens, self._params, f"block{i}", self.spec.heads, None, self.spec.activation, taps)
        logits = linear(tokens.mean(axis=1), self._params, "head")
        taps.append(("head", logits))
        return logits
