from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any, ClassVar


class DissimilarityMetric(ABC):
    """
    Abstract base class for differentiable representational metrics.

    Implementations in infrastructure/metrics/ compare two b x d activation
    matrices and return scalar tensors that backpropagate into both inputs.
    """

    name: ClassVar[Any]
    bounded_unit_interval: ClassVar[bool] = False

    @abstractmethod
    def similarity(self, r: Any, r_prime: Any) -> Any:
        """Similarity of two activation matrices (scalar tensor)."""
        raise NotImplementedError

    @abstractmethod
    def dissimilarity(self, r: Any, r_prime: Any) -> Any:
        """1 − similarity; the per-layer term of the guided loss."""
        raise NotImplementedError
