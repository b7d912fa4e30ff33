"""
Layer building blocks shared by the network families.
"""
from __future__ import annotations

from typing import List, Mapping, Optional

import numpy as np

from guidance_lab.domain.value_objects import Activation, Readout
from guidance_lab.infrastructure.networks.base import ParamSpec, Taps, norm_param_specs
from guidance_lab.shared.constants import ATTENTION_MASK_VALUE, FFN_MULTIPLIER
from guidance_lab.shared.core import Tensor, layer_norm, softmax

Params = Mapping[str, Tensor]


def activate(x: Tensor, activation: Activation) -> Tensor:
    return x.tanh() if activation == Activation.TANH else x.relu()


def linear(x: Tensor, params: Params, prefix: str) -> Tensor:
    """x @ W + b over the last axis; W is stored in x out layout."""
    return x @ params[f"{prefix}.weight"] + params[f"{prefix}.bias"]


def linear_specs(prefix: str, fan_in: int, fan_out: int) -> List[ParamSpec]:
    return [
        ParamSpec(f"{prefix}.weight", (fan_in, fan_out), "weight", fan_in),
        ParamSpec(f"{prefix}.bias", (fan_out,), "bias"),
    ]


# ============================================================================
# ATTENTION
# ============================================================================

def attention_mask(pad_mask: Optional[np.ndarray], length: int, causal: bool, dtype) -> Optional[np.ndarray]:
    """Additive b x 1 x T x T (or 1 x 1 x T x T) mask: 0 where allowed, a large negative elsewhere."""
    mask = None
    if pad_mask is not None and not pad_mask.all():
        mask = np.where(pad_mask[:, None, None, :], 0.0, ATTENTION_MASK_VALUE).astype(dtype)
    if causal:
        future = np.triu(np.ones((length, length), dtype=bool), k=1)
        causal_mask = np.where(future, ATTENTION_MASK_VALUE, 0.0).astype(dtype)[None, None]
        mask = causal_mask if mask is None else mask + causal_mask
    return mask


def multi_head_attention(x: Tensor, params: Params, prefix: str, heads: int, mask: Optional[np.ndarray]) -> Tensor:
    b, t, width = x.shape
    head_dim = width // heads

    def split(z: Tensor) -> Tensor:
        return z.reshape(b, t, heads, head_dim).transpose(0, 2, 1, 3)

    q = split(linear(x, params, f"{prefix}.q"))
    k = split(linear(x, params, f"{prefix}.k"))
    v = split(linear(x, params, f"{prefix}.v"))
    scores = (q @ k.swapaxes(-1, -2)) * (1.0 / np.sqrt(head_dim))
    if mask is not None:
        scores = scores + mask
    context = softmax(scores, axis=-1) @ v
    merged = context.transpose(0, 2, 1, 3).reshape(b, t, width)
    return linear(merged, params, f"{prefix}.out")


def transformer_block_specs(prefix: str, width: int) -> List[ParamSpec]:
    hidden = FFN_MULTIPLIER * width
    specs: List[ParamSpec] = []
    for name in ("q", "k", "v", "out"):
        specs += linear_specs(f"{prefix}.attn.{name}", width, width)
    specs += norm_param_specs(f"{prefix}.ln1", width)
    specs += linear_specs(f"{prefix}.ffn.in", width, hidden)
    specs += linear_specs(f"{prefix}.ffn.out", hidden, width)
    specs += norm_param_specs(f"{prefix}.ln2", width)
    return specs


BLOCK_TAPS = ("attn", "ln1", "ffn.in", "ffn.out", "ln2")


def transformer_block_tap_names(prefix: str) -> List[str]:
    return [f"{prefix}.{name}" for name in BLOCK_TAPS]


def transformer_block(
    x: Tensor,
    params: Params,
    prefix: str,
    heads: int,
    mask: Optional[np.ndarray],
    activation: Activation,
    taps: Taps,
) -> Tensor:
    """
    Post-norm block: LN(x + MHA(x)), then LN(x + FFN(x)).

    Taps, in order: the attention output projection, ln1, both FFN linears
    (pre-activation) and ln2.
    """
    attended = multi_head_attention(x, params, f"{prefix}.attn", heads, mask)
    taps.append((f"{prefix}.attn", attended))
    x = layer_norm(x + attended, params[f"{prefix}.ln1.gamma"], params[f"{prefix}.ln1.beta"])
    taps.append((f"{prefix}.ln1", x))
    expanded = linear(x, params, f"{prefix}.ffn.in")
    taps.append((f"{prefix}.ffn.in", expanded))
    projected = linear(activate(expanded, activation), params, f"{prefix}.ffn.out")
    taps.append((f"{prefix}.ffn.out", projected))
    x = layer_norm(x + projected, params[f"{prefix}.ln2.gamma"], params[f"{prefix}.ln2.beta"])
    taps.append((f"{prefix}.ln2", x))
    return x


# ============================================================================
# SEQUENCE READOUT
# ============================================================================

def sequence_readout(states: Tensor, pad_mask: np.ndarray, readout: Readout) -> Tensor:
    """b x T x w states -> b x T x w (per_token) or b x w (last / mean over real positions)."""
    if readout == Readout.PER_TOKEN:
        return states
    b = states.shape[0]
    if readout == Readout.LAST:
        last = np.maximum(pad_mask.sum(axis=1) - 1, 0)
        return states[np.arange(b), last]
    weights = pad_mask.astype(states.dtype)
    counts = np.maximum(weights.sum(axis=1, keepdims=True), 1.0)
    return (states * weights[:, :, None]).sum(axis=1) * (1.0 / counts)
