"""
Domain entity: LayerMapping

Correspondence between guide activation taps and target activation taps.
Guide tap ``iG`` is compared with target tap ``iT`` for every pair.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Tuple

from guidance_lab.domain.exceptions import UnsupportedMappingError


@dataclass(frozen=True)
class LayerMapping:
    """
    Immutable guide-to-target tap mapping (zero-based indices).

    Attributes:
    - t: number of target taps
    - l: number of guide taps
    - step: (t - 1) / (l - 1) when l > 1, else 1
    - pairs: ordered (guide_index, target_index) tuples, one per guide tap
    """
    t: int
    l: int
    step: Fraction = Fraction(1)
    pairs: Tuple[Tuple[int, int], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not isinstance(self.pairs, tuple):
            object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))
        if len(self.pairs) != self.l:
            raise UnsupportedMappingError(
                f"mapping has {len(self.pairs)} pairs for {self.l} guide taps"
            )
        previous = -1
        for i_g, (guide_index, target_index) in enumerate(self.pairs):
            if guide_index != i_g:
                raise UnsupportedMappingError("guide indices must enumerate 0..l-1 in order")
            if not 0 <= target_index < self.t:
                raise UnsupportedMappingError(
                    f"target index {target_index} out of range for {self.t} taps"
                )
            if target_index < previous:
                raise UnsupportedMappingError("target indices must be non-decreasing")
            previous = target_index

    @classmethod
    def empty(cls) -> "LayerMapping":
        """Mapping with no pairs; guided loss degenerates to the task loss."""
        return cls(t=0, l=0)

    @property
    def is_empty(self) -> bool:
        return not self.pairs

    def target_indices(self) -> Tuple[int, ...]:
        return tuple(target for _, target in self.pairs)

    def __str__(self) -> str:
        body = ", ".join(f"{g}->{t}" for g, t in self.pairs)
        return f"LayerMapping(t={self.t}, l={self.l}, [{body}])"
