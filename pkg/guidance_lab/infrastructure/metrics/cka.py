"""
Linear centered kernel alignment.

    K = R·Rᵀ,  K̃ = H·K·H,  HSIC(K̃, L̃) = tr(K̃·L̃)
    CKA(R, R′) = HSIC(K̃, L̃) / √(HSIC(K̃, K̃)·HSIC(L̃, L̃))

Everything is built from differentiable tensor operations, so the
dissimilarity 1 − CKA can be used directly as a training loss.
"""
from __future__ import annotations

from typing import Any

import numpy as np

from guidance_lab.domain.exceptions import (
    ContractViolationError,
    DegenerateBatchError,
    DegenerateRepresentationError,
    ShapeError,
)
from guidance_lab.infrastructure.metrics.representations import (
    ActivationMatrix,
    GramMatrix,
    as_activation,
)
from guidance_lab.shared.core import Tensor, matmul


def gram(r: ActivationMatrix | Any) -> GramMatrix:
    """Uncentered linear Gram matrix K = R·Rᵀ."""
    r = as_activation(r)
    if r.batch_size < 2:
        raise DegenerateBatchError("gram needs at least 2 samples", details={"b": r.batch_size})
    return GramMatrix(matmul(r.values, r.values.T), centered=False)


def center_gram(k: GramMatrix) -> GramMatrix:
    """
    H·K·H with H = I − 11ᵀ/b, written as K − row means − column means + grand mean.
    """
    if k.centered:
        raise ContractViolationError("gram matrix is already centered")
    values = k.values
    centered = (
        values
        - values.mean(axis=0, keepdims=True)
        - values.mean(axis=1, keepdims=True)
        + values.mean()
    )
    return GramMatrix(centered, centered=True)


def hsic(kc: GramMatrix, lc: GramMatrix) -> Tensor:
    """tr(K̃·L̃) of two centered Gram matrices."""
    if not (kc.centered and lc.centered):
        raise ContractViolationError("hsic expects centered gram matrices")
    if kc.size != lc.size:
        raise ShapeError("hsic gram sizes differ", details={"k": kc.size, "l": lc.size})
    return (kc.values * lc.values.T).sum()


def _check_denominator(value: Tensor, raw: GramMatrix, which: str) -> None:
    k = raw.values.data
    scale = max(float(np.sum(k.astype(np.float64) ** 2)), np.finfo(np.float64).tiny)
    floor = (np.finfo(k.dtype).eps * raw.size) ** 2 * scale
    if float(value.data) <= floor:
        raise DegenerateRepresentationError(
            "constant representation makes CKA undefined",
            details={"argument": which, "hsic": float(value.data)},
        )


def linear_cka(r: ActivationMatrix | Any, r_prime: ActivationMatrix | Any) -> Tensor:
    """Linear CKA in [0, 1]; 1 for representations equal up to scale and rotation."""
    r = as_activation(r)
    r_prime = as_activation(r_prime)
    if r.batch_size != r_prime.batch_size:
        raise ShapeError(
            "CKA arguments have different batch sizes",
            details={"b": r.batch_size, "b_prime": r_prime.batch_size},
        )
    k, l = gram(r), gram(r_prime)
    kc, lc = center_gram(k), center_gram(l)
    hsic_kl = hsic(kc, lc)
    hsic_kk = hsic(kc, kc)
    hsic_ll = hsic(lc, lc)
    _check_denominator(hsic_kk, k, "first")
    _check_denominator(hsic_ll, l, "second")
    # separate roots: the product of two large HSICs overflows float32
    return hsic_kl / (hsic_kk.sqrt() * hsic_ll.sqrt())


def cka_dissimilarity(r: ActivationMatrix | Any, r_prime: ActivationMatrix | Any) -> Tensor:
    return 1.0 - linear_cka(r, r_prime)
