"""
Adam / AdamW with bias correction, and global-norm gradient clipping.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from guidance_lab.domain.exceptions import ConfigError, NonFiniteGradientError
from guidance_lab.domain.value_objects import OptimizerName
from guidance_lab.shared.constants import (
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPS,
    ADAM_WEIGHT_DECAY,
    ADAMW_WEIGHT_DECAY,
)
from guidance_lab.shared.core.tensor import Tensor, zero_grads
from guidance_lab.shared.helpers.logging_utils import get_logger

logger = get_logger(__name__)


@dataclass
class OptimizerState:
    """
    Per-parameter moments plus hyperparameters.

    ``decoupled`` selects AdamW (weight decay subtracted as lr*wd*p) over
    Adam (weight decay added to the gradient).
    """
    lr: float
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS
    weight_decay: float = ADAM_WEIGHT_DECAY
    decoupled: bool = False
    t: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    def moments_for(self, name: str, like: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        if name not in self.m:
            self.m[name] = np.zeros_like(like)
            self.v[name] = np.zeros_like(like)
        return self.m[name], self.v[name]


def optimizer_step(
    state: OptimizerState,
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, Optional[np.ndarray]],
) -> None:
    """
    One Adam/AdamW update, in place on ``params`` and ``state``.

    All gradients are checked before any parameter changes; a NaN/Inf aborts
    the whole step. Parameters whose gradient is None are left untouched.
    """
    for name, grad in grads.items():
        if grad is not None and not np.all(np.isfinite(grad)):
            raise NonFiniteGradientError(
                "non-finite gradient, step aborted",
                details={"param": name, "step": state.t + 1},
            )

    state.t += 1
    bias1 = 1.0 - state.beta1 ** state.t
    bias2 = 1.0 - state.beta2 ** state.t
    for name, param in params.items():
        grad = grads.get(name)
        if grad is None:
            continue
        if param.shape != grad.shape:
            raise ConfigError("gradient shape differs from parameter", details={"param": name})
        if state.weight_decay and not state.decoupled:
            grad = grad + state.weight_decay * param
        m, v = state.moments_for(name, param)
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * grad * grad
        if state.weight_decay and state.decoupled:
            param *= 1.0 - state.lr * state.weight_decay
        param -= state.lr * (m / bias1) / (np.sqrt(v / bias2) + state.eps)


class Adam:
    """
    Optimizer over named parameter tensors.

    Usage:
        opt = Adam(net.named_parameters(), lr=1e-3)
        opt.zero_grad(); backward(loss); opt.step()
    """

    def __init__(
        self,
        named_params: Iterable[Tuple[str, Tensor]],
        lr: float,
        betas: Tuple[float, float] = (ADAM_BETA1, ADAM_BETA2),
        eps: float = ADAM_EPS,
        weight_decay: float = ADAM_WEIGHT_DECAY,
        decoupled: bool = False,
    ) -> None:
        if lr <= 0:
            raise ConfigError("learning rate must be positive", details={"lr": lr})
        self.params: Dict[str, Tensor] = dict(named_params)
        self.state = OptimizerState(
            lr=lr,
            beta1=betas[0],
            beta2=betas[1],
            eps=eps,
            weight_decay=weight_decay,
            decoupled=decoupled,
        )

    @property
    def lr(self) -> float:
        return self.state.lr

    def zero_grad(self) -> None:
        zero_grads(self.params.values())

    def step(self) -> None:
        optimizer_step(
            self.state,
            {name: p.data for name, p in self.params.items()},
            {name: p.grad for name, p in self.params.items()},
        )


class AdamW(Adam):
    """Adam with decoupled weight decay."""

    def __init__(
        self,
        named_params: Iterable[Tuple[str, Tensor]],
        lr: float,
        betas: Tuple[float, float] = (ADAM_BETA1, ADAM_BETA2),
        eps: float = ADAM_EPS,
        weight_decay: float = ADAMW_WEIGHT_DECAY,
    ) -> None:
        super().__init__(named_params, lr, betas=betas, eps=eps, weight_decay=weight_decay, decoupled=True)


def build_optimizer(
    name: OptimizerName,
    named_params: Iterable[Tuple[str, Tensor]],
    lr: float,
    *,
    betas: Tuple[float, float] = (ADAM_BETA1, ADAM_BETA2),
    eps: float = ADAM_EPS,
    weight_decay: Optional[float] = None,
) -> Adam:
    name = OptimizerName(name)
    if name == OptimizerName.ADAMW:
        wd = ADAMW_WEIGHT_DECAY if weight_decay is None else weight_decay
        return AdamW(named_params, lr, betas=betas, eps=eps, weight_decay=wd)
    wd = ADAM_WEIGHT_DECAY if weight_decay is None else weight_decay
    return Adam(named_params, lr, betas=betas, eps=eps, weight_decay=wd)


def global_grad_norm(params: Iterable[Tensor]) -> float:
    total = 0.0
    for p in params:
        if p.grad is not None:
            total += float(np.sum(np.square(p.grad, dtype=np.float64)))
    return float(np.sqrt(total))


def clip_grad_norm(params: Iterable[Tensor], max_norm: float) -> float:
    """
    Scale all gradients so their global L2 norm is at most ``max_norm``.

    Returns:
        The norm observed before clipping
    """
    if max_norm <= 0:
        raise ConfigError("max_norm must be positive", details={"max_norm": max_norm})
    params: List[Tensor] = list(params)
    norm = global_grad_norm(params)
    if norm > max_norm:
        scale = max_norm / norm
        for p in params:
            if p.grad is not None:
                p.grad = p.grad * np.asarray(scale, dtype=p.grad.dtype)
        logger.debug(f"clipped gradient norm {norm:.4f} -> {max_norm}")
    return norm
