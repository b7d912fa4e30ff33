"""
GLAB checkpoint files: network tensors, optimizer moments, RNG state and
run metadata in one little-endian binary document.

Layout::

    magic "GLAB" | u32 version
    u32 tensor count, then per tensor:
        u16 name length | name (UTF-8) | u32 ndim | u64 dims... | f32 data
    u8 has_optimizer, then if set:
        f64 lr, beta1, beta2, eps, weight_decay | u8 decoupled | u64 step
        u32 moment count, then per entry: name, m tensor, v tensor
    u8 has_rng, then if set: u64 seed | u32 length | JSON generator state
    u32 length | JSON metadata

Writes go to a temporary sibling file that replaces the target, so an
interrupted save never leaves a truncated checkpoint behind.
"""
from __future__ import annotations

import io
import json
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, BinaryIO, Dict, Optional, Union

import numpy as np

from guidance_lab.domain.exceptions import CheckpointError
from guidance_lab.shared.constants import CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from guidance_lab.shared.core import OptimizerState, RngState
from guidance_lab.shared.helpers import get_logger

logger = get_logger(__name__)


@dataclass
class Checkpoint:
    tensors: Dict[str, np.ndarray]
    optimizer: Optional[OptimizerState] = None
    rng_seed: Optional[int] = None
    rng_state: Optional[Dict[str, Any]] = None
    meta: Dict[str, Any] = field(default_factory=dict)

    def restore_rng(self) -> RngState:
        if self.rng_seed is None:
            raise CheckpointError("checkpoint holds no RNG state")
        rng = RngState(self.rng_seed)
        if self.rng_state is not None:
            rng.set_state(self.rng_state)
        return rng


# ============================================================================
# ENCODING
# ============================================================================

def _write_name(out: BinaryIO, name: str) -> None:
    raw = name.encode("utf-8")
    out.write(struct.pack("<H", len(raw)))
    out.write(raw)


def _write_tensor(out: BinaryIO, name: str, value: np.ndarray) -> None:
    value = np.asarray(value)
    _write_name(out, name)
    out.write(struct.pack("<I", value.ndim))
    if value.ndim:
        out.write(struct.pack(f"<{value.ndim}Q", *value.shape))
    out.write(np.ascontiguousarray(value, dtype="<f4").tobytes())


def _write_json(out: BinaryIO, document: Any) -> None:
    raw = json.dumps(document, sort_keys=True, separators=(",", ":")).encode("utf-8")
    out.write(struct.pack("<I", len(raw)))
    out.write(raw)


def encode_checkpoint(checkpoint: Checkpoint) -> bytes:
    out = io.BytesIO()
    out.write(CHECKPOINT_MAGIC)
    out.write(struct.pack("<I", CHECKPOINT_VERSION))

    out.write(struct.pack("<I", len(checkpoint.tensors)))
    for name, value in checkpoint.tensors.items():
        _write_tensor(out, name, value)

    opt = checkpoint.optimizer
    out.write(struct.pack("<B", opt is not None))
    if opt is not None:
        out.write(struct.pack("<5d", opt.lr, opt.beta1, opt.beta2, opt.eps, opt.weight_decay))
        out.write(struct.pack("<BQ", opt.decoupled, opt.t))
        out.write(struct.pack("<I", len(opt.m)))
        for name in opt.m:
            _write_name(out, name)
            _write_tensor(out, "m", opt.m[name])
            _write_tensor(out, "v", opt.v[name])

    out.write(struct.pack("<B", checkpoint.rng_seed is not None))
    if checkpoint.rng_seed is not None:
        out.write(struct.pack("<Q", checkpoint.rng_seed))
        _write_json(out, checkpoint.rng_state)

    _write_json(out, checkpoint.meta)
    return out.getvalue()


# ============================================================================
# DECODING
# ============================================================================

class _Reader:
    def __init__(self, blob: bytes, source: str):
        self.blob = blob
        self.offset = 0
        self.source = source

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.blob):
            raise CheckpointError("checkpoint is truncated", details={"path": self.source, "offset": self.offset})
        chunk = self.blob[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def name(self) -> str:
        (length,) = self.unpack("<H")
        return self.take(length).decode("utf-8")

    def tensor(self) -> tuple:
        name = self.name()
        (ndim,) = self.unpack("<I")
        shape = self.unpack(f"<{ndim}Q") if ndim else ()
        count = int(np.prod(shape, dtype=np.int64)) if ndim else 1
        data = np.frombuffer(self.take(4 * count), dtype="<f4").reshape(shape)
        return name, data.astype(np.float32)

    def document(self) -> Any:
        (length,) = self.unpack("<I")
        return json.loads(self.take(length).decode("utf-8"))


def decode_checkpoint(blob: bytes, source: str = "<bytes>") -> Checkpoint:
    reader = _Reader(blob, source)
    magic = reader.take(4)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)", details={"path": source, "magic": magic.hex()})
    (version,) = reader.unpack("<I")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError("unsupported checkpoint version", details={"path": source, "version": version})

    (count,) = reader.unpack("<I")
    tensors = dict(reader.tensor() for _ in range(count))

    optimizer = None
    (has_opt,) = reader.unpack("<B")
    if has_opt:
        lr, beta1, beta2, eps, weight_decay = reader.unpack("<5d")
        decoupled, step = reader.unpack("<BQ")
        optimizer = OptimizerState(
            lr=lr, beta1=beta1, beta2=beta2, eps=eps, weight_decay=weight_decay, decoupled=bool(decoupled), t=step
        )
        (moments,) = reader.unpack("<I")
        for _ in range(moments):
            name = reader.name()
            optimizer.m[name] = reader.tensor()[1]
            optimizer.v[name] = reader.tensor()[1]

    rng_seed = rng_state = None
    (has_rng,) = reader.unpack("<B")
    if has_rng:
        (rng_seed,) = reader.unpack("<Q")
        rng_state = reader.document()

    meta = reader.document()
    if reader.offset != len(blob):
        raise CheckpointError("trailing bytes after checkpoint", details={"path": source})
    return Checkpoint(tensors=tensors, optimizer=optimizer, rng_seed=rng_seed, rng_state=rng_state, meta=meta)


# ============================================================================
# FILES
# ============================================================================

def save_checkpoint(path: Union[str, Path], checkpoint: Checkpoint) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as f:
        f.write(encode_checkpoint(checkpoint))
    os.replace(tmp, path)
    logger.debug(f"checkpoint written: {path}")
    return path


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        blob = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint: {path}", details={"error": str(e)}) from e
    try:
        return decode_checkpoint(blob, str(path))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError("corrupt checkpoint section", details={"path": str(path), "error": str(e)}) from e
