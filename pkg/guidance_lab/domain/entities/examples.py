"""
Domain entities: dataset examples and DatasetSplit

Examples are immutable; pixel arrays are stored as numpy arrays by the
dataset generators but typed loosely here to keep the domain free of numerics.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Tuple


@dataclass(frozen=True)
class SequenceExample:
    """
    Token sequence with aligned targets.

    ``pad_mask`` is True on real positions; non-scored target positions carry
    the ignore index and never contribute to loss or accuracy.
    """
    example_id: str
    input_tokens: Tuple[int, ...]
    target_tokens: Tuple[int, ...]
    pad_mask: Tuple[bool, ...]

    def __post_init__(self) -> None:
        for name in ("input_tokens", "target_tokens", "pad_mask"):
            value = getattr(self, name)
            if not isinstance(value, tuple):
                object.__setattr__(self, name, tuple(value))
        if not (len(self.input_tokens) == len(self.target_tokens) == len(self.pad_mask)):
            raise ValueError(
                f"{self.example_id}: input, target and mask lengths differ"
            )

    def __len__(self) -> int:
        return len(self.input_tokens)


@dataclass(frozen=True)
class ParityExample:
    """Bitstring labelled 1 iff it holds an even number of ones."""
    example_id: str
    bits: Tuple[int, ...]
    label: int

    def __post_init__(self) -> None:
        if not isinstance(self.bits, tuple):
            object.__setattr__(self, "bits", tuple(self.bits))
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"{self.example_id}: bits must be 0/1")
        expected = 1 - (sum(self.bits) % 2)
        if self.label != expected:
            raise ValueError(f"{self.example_id}: label {self.label} contradicts parity")

    def __len__(self) -> int:
        return len(self.bits)


@dataclass(frozen=True)
class ImageExample:
    """C x H x W image with pixels in [0, 1] and a class label."""
    example_id: str
    pixels: Any
    label: int

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.pixels.shape)


@dataclass(frozen=True)
class DatasetSplit:
    """
    Train/val/test partitions with provenance.

    ``manifest_hash`` is a SHA-256 over the canonical serialization of every
    example; regenerating with the same seed reproduces it.
    """
    task: str
    train: Tuple[Any, ...]
    val: Tuple[Any, ...]
    test: Tuple[Any, ...]
    seed: int
    manifest_hash: str
    meta: Tuple[Tuple[str, Any], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        for name in ("train", "val", "test"):
            value = getattr(self, name)
            if not isinstance(value, tuple):
                object.__setattr__(self, name, tuple(value))
        ids = [ex.example_id for part in (self.train, self.val, self.test) for ex in part]
        if len(set(ids)) != len(ids):
            raise ValueError("dataset splits must be disjoint by example id")

    def part(self, name: str) -> Tuple[Any, ...]:
        if name not in ("train", "val", "test"):
            raise KeyError(f"unknown split {name!r}")
        return getattr(self, name)

    def sizes(self) -> Tuple[int, int, int]:
        return len(self.train), len(self.val), len(self.test)

    def meta_value(self, key: str, default: Any = None) -> Any:
        return dict(self.meta).get(key, default)
