"""
Domain entity: ActivationRecord

Ordered per-layer activations captured during one forward pass.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator, Optional, Tuple


@dataclass(frozen=True)
class ActivationRecord:
    """
    Immutable, ordered list of (layer_name, activation) pairs.

    Activations are raw tensors (b x d, b x T x d or b x C x H x W); the
    guidance loss flattens them. ``pad_mask`` (b x T, True = real position)
    is carried for sequence networks so padded positions can be zeroed.
    """
    entries: Tuple[Tuple[str, Any], ...] = field(default_factory=tuple)
    batch_id: Optional[int] = None
    pad_mask: Any = None

    def __post_init__(self) -> None:
        if not isinstance(self.entries, tuple):
            object.__setattr__(self, "entries", tuple(self.entries))
        names = [name for name, _ in self.entries]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate tap names in record: {names}")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Tuple[str, Any]]:
        return iter(self.entries)

    def __getitem__(self, index: int) -> Tuple[str, Any]:
        return self.entries[index]

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.entries)

    def activation(self, index: int) -> Any:
        return self.entries[index][1]

    def select(self, names: Tuple[str, ...]) -> "ActivationRecord":
        """Sub-record holding ``names`` in the given order."""
        by_name = dict(self.entries)
        missing = [name for name in names if name not in by_name]
        if missing:
            raise KeyError(f"taps not in record: {missing}")
        return ActivationRecord(
            tuple((name, by_name[name]) for name in names), batch_id=self.batch_id, pad_mask=self.pad_mask
        )
