"""
Seeded random streams.

``RngState`` wraps a numpy PCG64 generator. Independent concerns (target
init, guide init, shuffling, guide noise) draw from child streams derived
from the seed and a tag, so adding draws to one never shifts another.
"""
from __future__ import annotations

import zlib
from typing import Any, Dict, Sequence

import numpy as np

from guidance_lab.domain.exceptions import InvalidShapeError
from guidance_lab.shared.core.tensor import Tensor, get_default_dtype

_U64 = (1 << 64) - 1


class RngState:
    """Deterministic random stream: identical seed and call sequence give identical draws."""

    def __init__(self, seed: int) -> None:
        self.seed = int(seed) & _U64
        self.generator = np.random.Generator(np.random.PCG64(self.seed))

    def child(self, tag: str) -> "RngState":
        """Independent stream keyed by ``tag``; does not advance this stream."""
        sequence = np.random.SeedSequence([self.seed, zlib.crc32(tag.encode("utf-8"))])
        return RngState(int(sequence.generate_state(1, np.uint64)[0]))

    def get_state(self) -> Dict[str, Any]:
        return self.generator.bit_generator.state

    def set_state(self, state: Dict[str, Any]) -> None:
        self.generator.bit_generator.state = state

    # thin passthroughs used by data generators and initializers
    def integers(self, low: int, high: int, size: Any = None) -> Any:
        return self.generator.integers(low, high, size=size)

    def uniform(self, low: float, high: float, size: Any = None) -> Any:
        return self.generator.uniform(low, high, size=size)

    def permutation(self, n: int) -> np.ndarray:
        return self.generator.permutation(n)

    def standard_normal(self, size: Any) -> np.ndarray:
        return self.generator.standard_normal(size)

    def __repr__(self) -> str:
        return f"RngState(seed={self.seed})"


def _validate_shape(shape: Sequence[int]) -> tuple:
    shape = tuple(int(d) for d in shape)
    if not shape or any(d < 1 for d in shape):
        raise InvalidShapeError("shape needs at least one dimension, all >= 1", details={"shape": shape})
    return shape


def randn(shape: Sequence[int], rng: RngState, *, dtype: Any = None, requires_grad: bool = False) -> Tensor:
    """I.i.d. standard-normal tensor; advances ``rng``."""
    shape = _validate_shape(shape)
    dtype = dtype or get_default_dtype()
    return Tensor(rng.standard_normal(shape).astype(dtype), requires_grad=requires_grad, dtype=dtype)


def rand_uniform(
    shape: Sequence[int],
    bound: float,
    rng: RngState,
    *,
    dtype: Any = None,
    requires_grad: bool = False,
) -> Tensor:
    """I.i.d. U(-bound, bound) tensor; advances ``rng``."""
    shape = _validate_shape(shape)
    dtype = dtype or get_default_dtype()
    data = rng.uniform(-bound, bound, size=shape).astype(dtype)
    return Tensor(data, requires_grad=requires_grad, dtype=dtype)
