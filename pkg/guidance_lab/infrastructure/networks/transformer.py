"""
Transformer encoder and decoder over token inputs.

Token embeddings plus learned absolute position embeddings, ``depth``
post-norm blocks, a linear head. The decoder adds a causal mask; both mask
padded keys.
"""
from __future__ import annotations

from typing import Any, List, Optional, Tuple

import numpy as np

from guidance_lab.domain.value_objects import NetworkFamily
from guidance_lab.infrastructure.config.schemas import NetworkSpec
from guidance_lab.infrastructure.networks.base import Network, ParamSpec, Taps
from guidance_lab.infrastructure.networks.layers import (
    attention_mask,
    linear,
    linear_specs,
    sequence_readout,
    transformer_block,
    transformer_block_tap_names,
    transformer_block_specs,
)
from guidance_lab.shared.core import Tensor, embedding


class TransformerNetwork(Network):
    """
    Taps per block ``block{i}.attn``, ``.ln1``, ``.ffn.in``, ``.ffn.out``,
    ``.ln2``, then ``head`` (logits after the readout).
    """

    families = (NetworkFamily.TRANSFORMER_ENCODER, NetworkFamily.TRANSFORMER_DECODER)

    @property
    def causal(self) -> bool:
        return self.spec.family == NetworkFamily.TRANSFORMER_DECODER

    @classmethod
    def param_specs(cls, spec: NetworkSpec) -> List[ParamSpec]:
        w = spec.width
        specs = [
            ParamSpec("embed.weight", (spec.vocab, w), "embedding"),
            ParamSpec("pos.weight", (spec.context_len, w), "embedding"),
        ]
        for i in range(1, spec.depth + 1):
            specs += transformer_block_specs(f"block{i}", w)
        specs += linear_specs("head", w, spec.classes)
        return specs

    @classmethod
    def tap_names(cls, spec: NetworkSpec) -> List[str]:
        names: List[str] = []
        for i in range(1, spec.depth + 1):
            names += transformer_block_tap_names(f"block{i}")
        return names + ["head"]

    def _check_input(self, inputs: Any, pad_mask: Any) -> Tuple[np.ndarray, np.ndarray]:
        return self._token_input(inputs, pad_mask)

    def _forward(self, tokens: np.ndarray, pad_mask: Optional[np.ndarray], taps: Taps) -> Tensor:
        length = tokens.shape[1]
        x = embedding(self.p("embed.weight"), tokens) + self.p("pos.weight")[:length]
        mask = attention_mask(pad_mask, length, self.causal, self.dtype)
        for i in range(1, self.spec.depth + 1):
            x = transformer_block(x, self._params, f"block{i}", self.spec.heads, mask, self.spec.activation, taps)
        logits = linear(sequence_readout(x, pad_mask, self.spec.readout), self._params, "head")
        taps.append(("head", logits))
        return logits
