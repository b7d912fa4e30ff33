"""
Stacked Elman RNN over token inputs.
"""
from __future__ import annotations

from typing import Any, List, Optional, Tuple

import numpy as np

from guidance_lab.domain.value_objects import NetworkFamily
from guidance_lab.infrastructure.config.schemas import NetworkSpec
from guidance_lab.infrastructure.networks.base import Network, ParamSpec, Taps
from guidance_lab.infrastructure.networks.layers import activate, linear, linear_specs, sequence_readout
from guidance_lab.shared.core import Tensor, embedding, stack


class RecurrentStack(Network):
    """
    ``depth`` layers of h_t = act(x_t W_ih + h_{t-1} W_hh + b), hidden state
    zero at the start of every sequence. Taps ``rnn{i}``: the b x T x width
    outputs of each layer, then ``head``.
    """

    families = (NetworkFamily.RNN_STACK,)

    @classmethod
    def param_specs(cls, spec: NetworkSpec) -> List[ParamSpec]:
        w = spec.width
        specs = [ParamSpec("embed.weight", (spec.vocab, w), "embedding")]
        for i in range(1, spec.depth + 1):
            specs += [
                ParamSpec(f"rnn{i}.w_ih", (w, w), "weight", w),
                ParamSpec(f"rnn{i}.w_hh", (w, w), "weight", w),
                ParamSpec(f"rnn{i}.bias", (w,), "bias"),
            ]
        specs += linear_specs("head", w, spec.classes)
        return specs

    @classmethod
    def tap_names(cls, spec: NetworkSpec) -> List[str]:
        return [f"rnn{i}" for i in range(1, spec.depth + 1)] + ["head"]

    def _check_input(self, inputs: Any, pad_mask: Any) -> Tuple[np.ndarray, np.ndarray]:
        return self._token_input(inputs, pad_mask)

    def _layer(self, xs: Tensor, index: int) -> Tensor:
        b, t, w = xs.shape
        projected = xs @ self.p(f"rnn{index}.w_ih") + self.p(f"rnn{index}.bias")
        w_hh = self.p(f"rnn{index}.w_hh")
        h = Tensor(np.zeros((b, w), dtype=self.dtype))
        outputs = []
        for step in range(t):
            h = activate(projected[:, step] + h @ w_hh, self.spec.activation)
            outputs.append(h)
        return stack(outputs, axis=1)

    def _forward(self, tokens: np.ndarray, pad_mask: Optional[np.ndarray], taps: Taps) -> Tensor:
        x = embedding(self.p("embed.weight"), tokens)
        for i in range(1, self.spec.depth + 1):
            x = self._layer(x, i)
            taps.append((f"rnn{i}", x))
        logits = linear(sequence_readout(x, pad_mask, self.spec.readout), self._params, "head")
        taps.append(("head", logits))
        return logits
