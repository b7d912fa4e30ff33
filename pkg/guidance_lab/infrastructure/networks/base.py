"""
Base class for every network in the zoo.

A network is fully described by its ``NetworkSpec``: the spec determines the
ordered parameter list (``param_specs``), the normalization buffers and the
tap list. Parameters are created by ``init_params`` in the zoo and handed to
the constructor, so a checkpoint restores a network the same way.
"""
from __future__ import annotations

from abc import abstractmethod
from dataclasses import dataclass
from typing import Any, ClassVar, Dict, Iterator, List, Mapping, Optional, Tuple

import numpy as np

from guidance_lab.application.interfaces.network_interface import NetworkInterface
from guidance_lab.domain.entities import ActivationRecord
from guidance_lab.domain.exceptions import GuidanceLabError, LabelError, ShapeError, SpecError
from guidance_lab.domain.value_objects import NormMode
from guidance_lab.infrastructure.config.schemas import NetworkSpec
from guidance_lab.shared.core import RngState, Tensor

Taps = List[Tuple[str, Tensor]]


@dataclass(frozen=True)
class ParamSpec:
    """
    One named parameter: shape plus initialization rule.

    Weights and embeddings draw U(-bound, bound) with bound = sqrt(1 / fan_in);
    biases and norm shifts start at 0, norm scales at 1.
    """
    name: str
    shape: Tuple[int, ...]
    kind: str = "weight"
    fan_in: int = 1

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def initialize(self, rng: RngState, dtype: Any) -> np.ndarray:
        if self.kind in ("weight", "embedding"):
            bound = float(np.sqrt(1.0 / self.fan_in))
            return rng.uniform(-bound, bound, size=self.shape).astype(dtype)
        if self.kind in ("bias", "beta"):
            return np.zeros(self.shape, dtype=dtype)
        if self.kind == "gamma":
            return np.ones(self.shape, dtype=dtype)
        raise SpecError(f"unknown parameter kind: {self.kind}", details={"param": self.name})


@dataclass(frozen=True)
class BufferSpec:
    """Non-trainable state (batch-norm running statistics)."""
    name: str
    shape: Tuple[int, ...]
    fill: float = 0.0


def norm_param_specs(prefix: str, width: int) -> List[ParamSpec]:
    return [ParamSpec(f"{prefix}.gamma", (width,), "gamma"), ParamSpec(f"{prefix}.beta", (width,), "beta")]


def norm_buffer_specs(prefix: str, width: int) -> List[BufferSpec]:
    return [BufferSpec(f"{prefix}.running_mean", (width,), 0.0), BufferSpec(f"{prefix}.running_var", (width,), 1.0)]


class Network(NetworkInterface):
    """
    Instantiated network: spec, named parameters, buffers, tap list and mode.

    Subclasses implement ``param_specs``, ``tap_names``, ``_check_input`` and
    ``_forward``; ``_forward`` appends (name, activation) to ``taps`` in the
    order given by ``tap_names``.
    """

    families: ClassVar[Tuple[Any, ...]] = ()

    def __init__(
        self,
        spec: NetworkSpec,
        params: Mapping[str, Tensor],
        buffers: Optional[Mapping[str, np.ndarray]] = None,
    ) -> None:
        if spec.family not in self.families:
            raise SpecError(f"{type(self).__name__} cannot build {spec.family}")
        self.spec = spec
        self._params: Dict[str, Tensor] = {}
        for ps in self.param_specs(spec):
            if ps.name not in params:
                raise SpecError("missing parameter", details={"param": ps.name})
            tensor = params[ps.name]
            if tuple(tensor.shape) != ps.shape:
                raise SpecError(
                    "parameter shape does not match spec",
                    details={"param": ps.name, "expected": ps.shape, "got": tuple(tensor.shape)},
                )
            self._params[ps.name] = tensor
        extra = set(params) - set(self._params)
        if extra:
            raise SpecError("unexpected parameters", details={"params": sorted(extra)[:5]})

        dtype = self.dtype
        self._buffers: Dict[str, np.ndarray] = {}
        for bs in self.buffer_specs(spec):
            if buffers is not None and bs.name in buffers:
                self._buffers[bs.name] = np.array(buffers[bs.name], dtype=dtype).reshape(bs.shape)
            else:
                self._buffers[bs.name] = np.full(bs.shape, bs.fill, dtype=dtype)

        self.mode = NormMode.TRAIN
        self.frozen = False
        self._tap_list = tuple(self.tap_names(spec))

    # ---------------------------------------------------------------- structure

    @classmethod
    @abstractmethod
    def param_specs(cls, spec: NetworkSpec) -> List[ParamSpec]:
        raise NotImplementedError

    @classmethod
    def buffer_specs(cls, spec: NetworkSpec) -> List[BufferSpec]:
        return []

    @classmethod
    @abstractmethod
    def tap_names(cls, spec: NetworkSpec) -> List[str]:
        raise NotImplementedError

    @property
    def tap_list(self) -> Tuple[str, ...]:
        return self._tap_list

    @property
    def dtype(self) -> np.dtype:
        first = next(iter(self._params.values()))
        return first.dtype

    def p(self, name: str) -> Tensor:
        return self._params[name]

    def buffer(self, name: str) -> np.ndarray:
        return self._buffers[name]

    def named_parameters(self) -> List[Tuple[str, Tensor]]:
        return list(self._params.items())

    def parameters(self) -> Iterator[Tensor]:
        return iter(self._params.values())

    def named_buffers(self) -> List[Tuple[str, np.ndarray]]:
        return list(self._buffers.items())

    def count_params(self) -> int:
        return int(sum(p.size for p in self._params.values()))

    # ---------------------------------------------------------------- modes

    def set_mode(self, mode: NormMode | str) -> None:
        self.mode = NormMode(mode)

    def train(self) -> "Network":
        self.set_mode(NormMode.TRAIN)
        return self

    def eval(self) -> "Network":
        self.set_mode(NormMode.EVAL)
        return self

    def freeze(self, mode: NormMode = NormMode.EVAL) -> "Network":
        """Stop gradient tracking and pin a mode that never updates statistics."""
        if NormMode(mode) == NormMode.TRAIN:
            raise GuidanceLabError("a frozen network cannot run in train mode")
        for param in self._params.values():
            param.requires_grad = False
            param.grad = None
        self.frozen = True
        self.set_mode(mode)
        return self

    # ---------------------------------------------------------------- state

    def state_dict(self) -> Dict[str, np.ndarray]:
        """Copies of parameters and buffers (buffers prefixed ``buffer:``)."""
        state = {name: p.data.copy() for name, p in self._params.items()}
        state.update({f"buffer:{name}": b.copy() for name, b in self._buffers.items()})
        return state

    def load_state_dict(self, state: Mapping[str, np.ndarray]) -> None:
        for name, param in self._params.items():
            if name not in state:
                raise SpecError("state is missing a parameter", details={"param": name})
            param.data[...] = np.asarray(state[name], dtype=param.dtype).reshape(param.shape)
        for name, buf in self._buffers.items():
            key = f"buffer:{name}"
            if key in state:
                buf[...] = np.asarray(state[key], dtype=buf.dtype).reshape(buf.shape)

    # ---------------------------------------------------------------- forward

    @abstractmethod
    def _check_input(self, inputs: Any, pad_mask: Optional[np.ndarray]) -> Tuple[Any, Optional[np.ndarray]]:
        raise NotImplementedError

    @abstractmethod
    def _forward(self, inputs: Any, pad_mask: Optional[np.ndarray], taps: Taps) -> Tensor:
        raise NotImplementedError

    def forward_with_taps(
        self,
        inputs: Any,
        pad_mask: Any = None,
        batch_id: Optional[int] = None,
    ) -> Tuple[Tensor, ActivationRecord]:
        inputs, pad_mask = self._check_input(inputs, pad_mask)
        taps: Taps = []
        output = self._forward(inputs, pad_mask, taps)
        names = tuple(name for name, _ in taps)
        if names != self._tap_list:
            raise GuidanceLabError("forward taps differ from tap_list", details={"taps": names})
        return output, ActivationRecord(tuple(taps), batch_id=batch_id, pad_mask=pad_mask)

    def forward(self, inputs: Any, pad_mask: Any = None) -> Tensor:
        return self.forward_with_taps(inputs, pad_mask)[0]

    def __call__(self, inputs: Any, pad_mask: Any = None) -> Tensor:
        return self.forward(inputs, pad_mask)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(family={self.spec.family}, params={self.count_params()}, mode={self.mode})"

    # ---------------------------------------------------------------- input helpers

    def _continuous_input(self, inputs: Any) -> Tensor:
        data = inputs.data if isinstance(inputs, Tensor) else np.asarray(inputs)
        expected = tuple(self.spec.input_shape or ())
        if data.ndim < 2:
            raise ShapeError("input needs a leading batch axis", details={"shape": data.shape})
        if tuple(data.shape[1:]) != expected:
            raise ShapeError(
                "input shape does not match spec",
                details={"expected": ("b",) + expected, "got": data.shape},
            )
        return Tensor(data, dtype=self.dtype)

    def _token_input(self, inputs: Any, pad_mask: Any) -> Tuple[np.ndarray, np.ndarray]:
        tokens = np.asarray(inputs.data if isinstance(inputs, Tensor) else inputs)
        if tokens.ndim != 2:
            raise ShapeError("token input must be b x T", details={"shape": tokens.shape})
        if not np.issubdtype(tokens.dtype, np.integer):
            if not np.all(np.equal(np.mod(tokens, 1), 0)):
                raise ShapeError("token input must hold integers", details={"dtype": str(tokens.dtype)})
            tokens = tokens.astype(np.int64)
        if tokens.shape[1] > self.spec.context_len:
            raise ShapeError(
                "sequence longer than context_len",
                details={"length": tokens.shape[1], "context_len": self.spec.context_len},
            )
        if tokens.size and (tokens.min() < 0 or tokens.max() >= self.spec.vocab):
            raise LabelError("token id out of range", details={"vocab": self.spec.vocab})
        if pad_mask is None:
            pad_mask = np.ones(tokens.shape, dtype=bool)
        pad_mask = np.asarray(pad_mask, dtype=bool)
        if pad_mask.shape != tokens.shape:
            raise ShapeError("pad_mask does not match tokens", details={"mask": pad_mask.shape, "tokens": tokens.shape})
        return tokens, pad_mask
