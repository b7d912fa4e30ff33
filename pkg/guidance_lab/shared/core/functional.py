"""
Numerical kernels built on the autodiff tensor: activations, convolution,
normalization, softmax and the task losses.

Kernels with awkward adjoints (conv2d, the fused losses) register their own
backward; the rest are compositions of differentiable tensor operations.
"""
from __future__ import annotations

from typing import Any, Literal, Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from guidance_lab.domain.exceptions import (
    DegenerateBatchError,
    GuidanceLabError,
    LabelError,
    ShapeError,
)
from guidance_lab.domain.value_objects import NormMode
from guidance_lab.shared.constants import (
    BATCH_NORM_EPS,
    BATCH_NORM_MOMENTUM,
    IGNORE_INDEX,
    LAYER_NORM_EPS,
)
from guidance_lab.shared.core.tensor import Tensor, as_tensor, matmul

ElementwiseOp = Literal["relu", "tanh", "sigmoid", "add", "mul", "scale"]

__all__ = [
    "matmul",
    "apply_elementwise",
    "relu",
    "tanh",
    "sigmoid",
    "conv2d",
    "batch_norm",
    "layer_norm",
    "softmax",
    "log_softmax",
    "softmax_cross_entropy",
    "bce_with_logits",
    "mse_loss",
    "embedding",
    "concat",
    "stack",
]


# ============================================================================
# ELEMENTWISE
# ============================================================================

def relu(x: Tensor) -> Tensor:
    return x.relu()


def tanh(x: Tensor) -> Tensor:
    return x.tanh()


def sigmoid(x: Tensor) -> Tensor:
    return x.sigmoid()


def apply_elementwise(op: ElementwiseOp, *args: Any) -> Tensor:
    """
    Dispatch an elementwise operation by name.

    ``scale`` takes (tensor, factor); ``add``/``mul`` broadcast their operands.
    """
    if op == "relu":
        return relu(as_tensor(args[0]))
    if op == "tanh":
        return tanh(as_tensor(args[0]))
    if op == "sigmoid":
        return sigmoid(as_tensor(args[0]))
    if op == "add":
        return as_tensor(args[0]) + args[1]
    if op == "mul":
        return as_tensor(args[0]) * args[1]
    if op == "scale":
        return as_tensor(args[0]) * float(args[1])
    raise GuidanceLabError(f"unknown elementwise op: {op}")


# ============================================================================
# CONVOLUTION
# ============================================================================

def conv2d(
    x: Tensor,
    kernel: Tensor,
    bias: Optional[Tensor] = None,
    stride: int = 1,
    padding: int = 0,
) -> Tensor:
    """
    2-D cross-correlation with zero padding.

    Args:
        x: b x C x H x W input
        kernel: O x C x kh x kw weights
        bias: optional O-vector
        stride: step between windows on both spatial axes
        padding: zeros added on every spatial border

    Returns:
        b x O x Ho x Wo tensor, Ho = floor((H + 2p - kh) / stride) + 1
    """
    if x.ndim != 4 or kernel.ndim != 4:
        raise ShapeError("conv2d expects 4-D input and kernel", details={"x": x.shape, "kernel": kernel.shape})
    b, c, h, w = x.shape
    o, kc, kh, kw = kernel.shape
    if kc != c:
        raise ShapeError("conv2d channel mismatch", details={"x": x.shape, "kernel": kernel.shape})
    if kh > h + 2 * padding or kw > w + 2 * padding:
        raise ShapeError(
            "conv2d kernel larger than padded input",
            details={"x": x.shape, "kernel": kernel.shape, "padding": padding},
        )
    if stride < 1:
        raise ShapeError("conv2d stride must be >= 1", details={"stride": stride})

    pad = ((0, 0), (0, 0), (padding, padding), (padding, padding))
    xp = np.pad(x.data, pad) if padding else x.data
    windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    ho, wo = windows.shape[2], windows.shape[3]
    out = np.einsum("bchwij,ocij->bohw", windows, kernel.data)

    def _backward(g):
        grad_kernel = np.einsum("bchwij,bohw->ocij", windows, g)
        cols = np.einsum("bohw,ocij->bchwij", g, kernel.data)
        grad_xp = np.zeros_like(xp)
        for i in range(kh):
            for j in range(kw):
                grad_xp[:, :, i:i + stride * ho:stride, j:j + stride * wo:stride] += cols[..., i, j]
        if padding:
            grad_xp = grad_xp[:, :, padding:padding + h, padding:padding + w]
        return grad_xp, grad_kernel

    result = Tensor.from_op(out, (x, kernel), _backward, "conv2d")
    if bias is not None:
        result = result + bias.reshape(1, o, 1, 1)
    return result


# ============================================================================
# NORMALIZATION
# ============================================================================

def batch_norm(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    mode: NormMode = NormMode.TRAIN,
    momentum: float = BATCH_NORM_MOMENTUM,
    eps: float = BATCH_NORM_EPS,
) -> Tensor:
    """
    Per-feature standardization over the batch (and spatial) axes.

    Works on b x F and b x C x H x W inputs. ``running_mean``/``running_var``
    are updated in place in TRAIN mode only (unbiased variance, exponential
    moving average with ``momentum``); EVAL normalizes with them; FROZEN uses
    batch statistics and leaves them untouched.
    """
    if x.ndim == 2:
        axes, view = (0,), (1, -1)
    elif x.ndim == 4:
        axes, view = (0, 2, 3), (1, -1, 1, 1)
    else:
        raise ShapeError("batch_norm expects 2-D or 4-D input", details={"shape": x.shape})

    if mode == NormMode.EVAL:
        mean = running_mean.reshape(view)
        var = running_var.reshape(view)
        x_hat = (x - mean) * (1.0 / np.sqrt(var + eps))
    else:
        if x.shape[0] < 2:
            raise DegenerateBatchError(
                "batch_norm needs at least 2 samples with batch statistics",
                details={"shape": x.shape, "mode": str(mode)},
            )
        mean = x.mean(axis=axes, keepdims=True)
        centered = x - mean
        var = (centered * centered).mean(axis=axes, keepdims=True)
        x_hat = centered / (var + eps).sqrt()
        if mode == NormMode.TRAIN:
            count = int(np.prod([x.shape[ax] for ax in axes]))
            unbiased = var.data.reshape(-1) * count / max(count - 1, 1)
            running_mean *= 1.0 - momentum
            running_mean += momentum * mean.data.reshape(-1)
            running_var *= 1.0 - momentum
            running_var += momentum * unbiased

    return x_hat * gamma.reshape(view) + beta.reshape(view)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = LAYER_NORM_EPS) -> Tensor:
    """Per-sample standardization over the last axis, then affine."""
    if x.shape[-1] < 2:
        raise DegenerateBatchError("layer_norm needs a normalized axis of length >= 2", details={"shape": x.shape})
    mean = x.mean(axis=-1, keepdims=True)
    centered = x - mean
    var = (centered * centered).mean(axis=-1, keepdims=True)
    return centered / (var + eps).sqrt() * gamma + beta


# ============================================================================
# SOFTMAX / LOSSES
# ============================================================================

def softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x - x.data.max(axis=axis, keepdims=True)
    exps = shifted.exp()
    return exps / exps.sum(axis=axis, keepdims=True)


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x - x.data.max(axis=axis, keepdims=True)
    return shifted - shifted.exp().sum(axis=axis, keepdims=True).log()


def softmax_cross_entropy(logits: Tensor, labels: Any, ignore_index: int = IGNORE_INDEX) -> Tensor:
    """
    Mean negative log-likelihood of ``labels`` under softmax(``logits``).

    ``logits`` is (..., C) and ``labels`` the matching integer array (...);
    positions labelled ``ignore_index`` contribute neither loss nor gradient
    and are excluded from the mean.
    """
    labels = np.asarray(labels, dtype=np.int64)
    classes = logits.shape[-1]
    if labels.shape != logits.shape[:-1]:
        raise ShapeError("labels do not match logits", details={"logits": logits.shape, "labels": labels.shape})

    flat_logits = logits.data.reshape(-1, classes)
    flat_labels = labels.reshape(-1)
    valid = flat_labels != ignore_index
    if not np.any(valid):
        raise LabelError("no scored positions in batch", details={"ignore_index": ignore_index})
    bad = valid & ((flat_labels < 0) | (flat_labels >= classes))
    if np.any(bad):
        raise LabelError(
            "label out of range",
            details={"classes": classes, "labels": sorted(set(flat_labels[bad].tolist()))[:5]},
        )

    shifted = flat_logits - flat_logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    rows = np.nonzero(valid)[0]
    count = rows.size
    loss = -log_probs[rows, flat_labels[rows]].sum() / count

    def _backward(g):
        grad = np.exp(log_probs)
        grad[rows, flat_labels[rows]] -= 1.0
        grad[~valid] = 0.0
        return ((g / count) * grad.reshape(logits.shape),)

    return Tensor.from_op(np.asarray(loss), (logits,), _backward, "softmax_cross_entropy")


def bce_with_logits(logits: Tensor, targets: Any) -> Tensor:
    """Mean binary cross-entropy of ``targets`` in {0, 1} given raw logits."""
    targets = np.asarray(targets, dtype=logits.dtype).reshape(logits.shape)
    if np.any((targets < 0) | (targets > 1)):
        raise LabelError("bce targets must lie in [0, 1]")
    z = logits.data
    loss = (np.maximum(z, 0) - z * targets + np.log1p(np.exp(-np.abs(z)))).mean()
    count = z.size

    def _backward(g):
        probs = 0.5 * (1.0 + np.tanh(0.5 * z))
        return (g * (probs - targets) / count,)

    return Tensor.from_op(np.asarray(loss), (logits,), _backward, "bce_with_logits")


def mse_loss(pred: Tensor, target: Any) -> Tensor:
    target = as_tensor(target, dtype=pred.dtype)
    if pred.shape != target.shape:
        raise ShapeError("mse_loss shapes differ", details={"pred": pred.shape, "target": target.shape})
    diff = pred - target
    return (diff * diff).mean()


# ============================================================================
# INDEXING / JOINING
# ============================================================================

def embedding(weight: Tensor, ids: Any) -> Tensor:
    """Row lookup ``weight[ids]``; gradients scatter-add into the used rows."""
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= weight.shape[0]):
        raise LabelError("token id out of range", details={"vocab": weight.shape[0]})
    return weight[ids]


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum(sizes)[:-1]

    def _backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return Tensor.from_op(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), _backward, "concat")


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    shapes = {t.shape for t in tensors}
    if len(shapes) != 1:
        raise ShapeError("stack needs equal shapes", details={"shapes": sorted(shapes)})

    def _backward(g):
        return tuple(np.moveaxis(g, axis, 0))

    return Tensor.from_op(np.stack([t.data for t in tensors], axis=axis), tuple(tensors), _backward, "stack")
