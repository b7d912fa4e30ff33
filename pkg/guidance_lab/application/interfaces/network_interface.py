from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any, Iterable, Tuple


class NetworkInterface(ABC):
    """
    Abstract base class for networks that expose ordered activation taps.

    Implementations in infrastructure/networks/ run a forward pass and return
    the output together with an ActivationRecord whose order equals
    ``tap_list``.
    """

    @property
    @abstractmethod
    def tap_list(self) -> Tuple[str, ...]:
        """Ordered names of the captured layers (forward execution order)."""
        raise NotImplementedError

    @abstractmethod
    def forward_with_taps(self, inputs: Any, pad_mask: Any = None, batch_id: int | None = None) -> Tuple[Any, Any]:
        """
        Run a forward pass.

        Returns:
        - (output tensor, ActivationRecord)
        """
        raise NotImplementedError

    @abstractmethod
    def named_parameters(self) -> Iterable[Tuple[str, Any]]:
        raise NotImplementedError

    @abstractmethod
    def set_mode(self, mode: Any) -> None:
        """Switch normalization behavior (train / eval / frozen)."""
        raise NotImplementedError
