"""
Tensor core: autodiff tensors, numerical kernels, seeded randomness and optimizers.
"""
from .tensor import (
    Tensor,
    GradTape,
    as_tensor,
    backward,
    default_dtype,
    get_default_dtype,
    is_grad_enabled,
    matmul,
    no_grad,
    zero_grads,
)
from .functional import (
    apply_elementwise,
    batch_norm,
    bce_with_logits,
    concat,
    conv2d,
    embedding,
    layer_norm,
    log_softmax,
    mse_loss,
    relu,
    sigmoid,
    softmax,
    softmax_cross_entropy,
    stack,
    tanh,
)
from .random import RngState, randn, rand_uniform
from .optim import Adam, AdamW, OptimizerState, build_optimizer, clip_grad_norm, global_grad_norm, optimizer_step

__all__ = [
    "Tensor",
    "GradTape",
    "as_tensor",
    "backward",
    "default_dtype",
    "get_default_dtype",
    "is_grad_enabled",
    "matmul",
    "no_grad",
    "zero_grads",
    "apply_elementwise",
    "batch_norm",
    "bce_with_logits",
    "concat",
    "conv2d",
    "embedding",
    "layer_norm",
    "log_softmax",
    "mse_loss",
    "relu",
    "sigmoid",
    "softmax",
    "softmax_cross_entropy",
    "stack",
    "tanh",
    "RngState",
    "randn",
    "rand_uniform",
    "Adam",
    "AdamW",
    "OptimizerState",
    "build_optimizer",
    "clip_grad_norm",
    "global_grad_norm",
    "optimizer_step",
]
