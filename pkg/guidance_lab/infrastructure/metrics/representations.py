"""
Value types for representational similarity: activation matrices, Gram
matrices and representational dissimilarity matrices.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Literal

import numpy as np

from guidance_lab.domain.exceptions import DegenerateBatchError, NonFiniteError, ShapeError
from guidance_lab.shared.core import Tensor, as_tensor

NetworkTag = Literal["target", "guide"]


@dataclass(frozen=True)
class ActivationMatrix:
    """b x d activations of one layer: b samples, d flattened features."""
    values: Tensor
    layer_name: str = ""
    network_tag: NetworkTag = "target"

    def __post_init__(self) -> None:
        if not isinstance(self.values, Tensor):
            object.__setattr__(self, "values", as_tensor(self.values))
        if self.values.ndim != 2:
            raise ShapeError("activation matrix must be 2-D", details={"shape": self.values.shape})
        b, d = self.values.shape
        if b < 2:
            raise DegenerateBatchError("activation matrix needs at least 2 samples", details={"b": b})
        if d < 1:
            raise ShapeError("activation matrix needs at least 1 feature", details={"d": d})
        if not np.all(np.isfinite(self.values.data)):
            raise NonFiniteError("activation matrix has non-finite entries", details={"layer": self.layer_name})

    @property
    def batch_size(self) -> int:
        return self.values.shape[0]

    @property
    def features(self) -> int:
        return self.values.shape[1]


def as_activation(value: Any, layer_name: str = "", network_tag: NetworkTag = "target") -> ActivationMatrix:
    if isinstance(value, ActivationMatrix):
        return value
    return ActivationMatrix(as_tensor(value), layer_name, network_tag)


def _tolerance(values: np.ndarray, tol: float) -> float:
    return tol * max(1.0, float(np.abs(values).max(initial=0.0)))


@dataclass(frozen=True)
class GramMatrix:
    """b x b inner-product matrix; ``centered`` once H·K·H has been applied."""
    values: Tensor
    centered: bool = False

    def __post_init__(self) -> None:
        shape = self.values.shape
        if len(shape) != 2 or shape[0] != shape[1]:
            raise ShapeError("gram matrix must be square", details={"shape": shape})

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def is_symmetric(self, tol: float = 1e-6) -> bool:
        k = self.values.data
        return bool(np.all(np.abs(k - k.T) <= _tolerance(k, tol)))

    def is_psd(self, tol: float = 1e-6) -> bool:
        k = self.values.data.astype(np.float64)
        eigenvalues = np.linalg.eigvalsh(0.5 * (k + k.T))
        return bool(eigenvalues.min() >= -tol * max(float(np.trace(k)), 1.0))

    def row_sums_vanish(self, tol: float = 1e-5) -> bool:
        k = self.values.data
        return bool(np.all(np.abs(k.sum(axis=1)) <= _tolerance(k, tol)))


@dataclass(frozen=True)
class RDMatrix:
    """b x b pairwise cosine distances."""
    values: Tensor

    def __post_init__(self) -> None:
        shape = self.values.shape
        if len(shape) != 2 or shape[0] != shape[1]:
            raise ShapeError("RDM must be square", details={"shape": shape})

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def lower_triangle(self) -> Tensor:
        """Strictly-lower-triangle entries, row-major."""
        rows, cols = np.tril_indices(self.size, k=-1)
        return self.values[rows, cols]
