"""
Representational similarity analysis: cosine-distance RDMs compared by the
Pearson correlation of their strictly-lower triangles.
"""
from __future__ import annotations

from typing import Any

import numpy as np

from guidance_lab.domain.exceptions import DegenerateBatchError, DegenerateRepresentationError, ShapeError
from guidance_lab.infrastructure.metrics.representations import ActivationMatrix, RDMatrix, as_activation
from guidance_lab.shared.constants import MIN_METRIC_BATCH
from guidance_lab.shared.core import Tensor, matmul


def rdm_cosine(r: ActivationMatrix | Any) -> RDMatrix:
    """D[i, j] = 1 − cos(R_i, R_j) in [0, 2], with an exactly zero diagonal."""
    r = as_activation(r)
    values = r.values
    norms = (values * values).sum(axis=1, keepdims=True).sqrt()
    zero_rows = np.nonzero(norms.data.reshape(-1) <= np.finfo(values.dtype).tiny)[0]
    if zero_rows.size:
        raise DegenerateRepresentationError(
            "zero-norm sample has no cosine distance",
            details={"rows": zero_rows.tolist()[:5]},
        )
    unit = values / norms
    off_diagonal = 1.0 - np.eye(r.batch_size, dtype=values.dtype)
    rdm = (1.0 - matmul(unit, unit.T)) * off_diagonal
    # rounding can push near-parallel rows slightly below 0
    return RDMatrix(rdm.clip(0.0, 2.0))


def _pearson(x: Tensor, y: Tensor) -> Tensor:
    xc = x - x.mean()
    yc = y - y.mean()
    var_x = (xc * xc).sum()
    var_y = (yc * yc).sum()
    for name, var, raw in (("first", var_x, x), ("second", var_y, y)):
        floor = (np.finfo(raw.dtype).eps * raw.size) ** 2 * max(float(np.sum(raw.data.astype(np.float64) ** 2)), 1.0)
        if float(var.data) <= floor:
            raise DegenerateRepresentationError(
                "RDM lower triangle is constant",
                details={"argument": name},
            )
    return (xc * yc).sum() / (var_x * var_y).sqrt()


def rsa_similarity(r: ActivationMatrix | Any, r_prime: ActivationMatrix | Any) -> Tensor:
    """Pearson correlation of the two RDMs' lower triangles, in [−1, 1]."""
    r = as_activation(r)
    r_prime = as_activation(r_prime)
    if r.batch_size != r_prime.batch_size:
        raise ShapeError(
            "RSA arguments have different batch sizes",
            details={"b": r.batch_size, "b_prime": r_prime.batch_size},
        )
    if r.batch_size < MIN_METRIC_BATCH:
        raise DegenerateBatchError("RSA needs at least 3 samples", details={"b": r.batch_size})
    return _pearson(rdm_cosine(r).lower_triangle(), rdm_cosine(r_prime).lower_triangle())


def rsa_dissimilarity(r: ActivationMatrix | Any, r_prime: ActivationMatrix | Any) -> Tensor:
    return 1.0 - rsa_similarity(r, r_prime)
