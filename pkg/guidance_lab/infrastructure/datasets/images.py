"""
Small-image classification data: a deterministic synthetic shape renderer and
the GIMG raw binary format.

GIMG layout (little-endian)::

    magic   4 bytes  b"GIMG"
    version u32      1
    n, C, H, W       u32 each
    pixels  n*C*H*W  u8, example-major, then channel, row, column
    labels  n        u16
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np

from guidance_lab.domain.entities import DatasetSplit, ImageExample
from guidance_lab.domain.exceptions import DatasetError
from guidance_lab.domain.value_objects import TaskName
from guidance_lab.shared.constants import IMAGE_MAGIC, IMAGE_NOISE_STD, IMAGE_SHAPES, IMAGE_VERSION
from guidance_lab.shared.core import RngState
from guidance_lab.shared.helpers import get_logger

from .manifest import assemble_split

logger = get_logger(__name__)

_HEADER = struct.Struct("<4sIIIII")


@dataclass(frozen=True)
class ImageSynthSpec:
    """Parameters of the synthetic shape dataset; class ``c`` renders ``IMAGE_SHAPES[c]``."""
    classes: int = 4
    height: int = 16
    width: int = 16
    channels: int = 1
    n: int = 4000

    def validate(self) -> None:
        if not 2 <= self.classes <= len(IMAGE_SHAPES):
            raise DatasetError(
                f"synthetic images support 2..{len(IMAGE_SHAPES)} classes", details={"classes": self.classes}
            )
        if self.height < 8 or self.width < 8:
            raise DatasetError("synthetic images need H, W >= 8", details={"size": (self.height, self.width)})
        if self.channels < 1 or self.n < 1:
            raise DatasetError("channels and n must be >= 1", details={"channels": self.channels, "n": self.n})


# ============================================================================
# SHAPE MASKS
# ============================================================================
# Each mask takes offsets (dy, dx) from the shape centre, normalized by the
# shape radius, and returns a boolean foreground mask.

def _square(dy, dx):
    return (np.abs(dy) <= 0.8) & (np.abs(dx) <= 0.8)


def _disk(dy, dx):
    return dy ** 2 + dx ** 2 <= 0.8


def _triangle(dy, dx):
    return (dy <= 0.8) & (dy >= -0.8) & (np.abs(dx) <= (dy + 0.8) * 0.6)


def _cross(dy, dx):
    return ((np.abs(dy) <= 0.25) & (np.abs(dx) <= 1.0)) | ((np.abs(dx) <= 0.25) & (np.abs(dy) <= 1.0))


def _ring(dy, dx):
    r2 = dy ** 2 + dx ** 2
    return (r2 <= 1.0) & (r2 >= 0.4)


def _hbar(dy, dx):
    return (np.abs(dy) <= 0.3) & (np.abs(dx) <= 1.0)


def _vbar(dy, dx):
    return (np.abs(dx) <= 0.3) & (np.abs(dy) <= 1.0)


def _diamond(dy, dx):
    return np.abs(dy) + np.abs(dx) <= 1.0


SHAPE_MASKS: Dict[str, Callable[[np.ndarray, np.ndarray], np.ndarray]] = {
    "square": _square,
    "disk": _disk,
    "triangle": _triangle,
    "cross": _cross,
    "ring": _ring,
    "hbar": _hbar,
    "vbar": _vbar,
    "diamond": _diamond,
}


def render_shape(label: int, spec: ImageSynthSpec, rng: RngState) -> np.ndarray:
    """One C x H x W image of shape class ``label`` with random placement, size and colour."""
    h, w = spec.height, spec.width
    radius = rng.uniform(0.25, 0.4) * min(h, w)
    cy = rng.uniform(radius, h - radius)
    cx = rng.uniform(radius, w - radius)
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    mask = SHAPE_MASKS[IMAGE_SHAPES[label]]((ys + 0.5 - cy) / radius, (xs + 0.5 - cx) / radius)

    background = rng.uniform(0.0, 0.3, size=(spec.channels, 1, 1))
    foreground = rng.uniform(0.6, 1.0, size=(spec.channels, 1, 1))
    image = np.where(mask[None, :, :], foreground, background)
    image = image + IMAGE_NOISE_STD * rng.standard_normal((spec.channels, h, w))
    return quantize(np.clip(image, 0.0, 1.0))


def quantize(pixels: np.ndarray) -> np.ndarray:
    """Round to the u8 grid so that saved and in-memory images are identical."""
    return np.rint(np.asarray(pixels) * 255.0).astype(np.uint8).astype(np.float32) / 255.0


def _image_example(example_id: str, content: Tuple[np.ndarray, int]) -> ImageExample:
    pixels, label = content
    return ImageExample(example_id=example_id, pixels=pixels, label=int(label))


def generate_images(spec: ImageSynthSpec, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """(pixels n x C x H x W in [0, 1], labels n) drawn deterministically from ``seed``."""
    spec.validate()
    rng = RngState(seed).child("images")
    labels = rng.integers(0, spec.classes, size=spec.n).astype(np.int64)
    pixels = np.stack([render_shape(int(label), spec, rng) for label in labels])
    return pixels, labels


# ============================================================================
# GIMG FILES
# ============================================================================

def write_image_file(path: Union[str, Path], pixels: np.ndarray, labels: np.ndarray) -> Path:
    pixels = np.asarray(pixels)
    labels = np.asarray(labels)
    if pixels.ndim != 4 or labels.shape != (pixels.shape[0],):
        raise DatasetError("expected n x C x H x W pixels and n labels", details={"pixels": pixels.shape})
    if np.any(labels < 0) or np.any(labels > np.iinfo(np.uint16).max):
        raise DatasetError("labels must fit in u16")
    n, c, h, w = pixels.shape
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raw = np.rint(np.clip(pixels, 0.0, 1.0) * 255.0).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(_HEADER.pack(IMAGE_MAGIC, IMAGE_VERSION, n, c, h, w))
        f.write(raw.tobytes(order="C"))
        f.write(labels.astype("<u2").tobytes())
    return path


def read_image_file(path: Union[str, Path]) -> Tuple[np.ndarray, np.ndarray]:
    """Parse a GIMG file into float pixels in [0, 1] and integer labels."""
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as e:
        raise DatasetError(f"cannot read image file: {path}", details={"error": str(e)}) from e
    if len(blob) < _HEADER.size:
        raise DatasetError("image file shorter than its header", details={"path": str(path)})
    magic, version, n, c, h, w = _HEADER.unpack_from(blob)
    if magic != IMAGE_MAGIC:
        raise DatasetError("bad image file magic", details={"path": str(path), "magic": magic.hex()})
    if version != IMAGE_VERSION:
        raise DatasetError("unsupported image file version", details={"path": str(path), "version": version})
    pixel_bytes = n * c * h * w
    expected = _HEADER.size + pixel_bytes + 2 * n
    if len(blob) != expected:
        raise DatasetError(
            "image file size does not match its header",
            details={"path": str(path), "bytes": len(blob), "expected": expected},
        )
    pixels = np.frombuffer(blob, dtype=np.uint8, count=pixel_bytes, offset=_HEADER.size)
    labels = np.frombuffer(blob, dtype="<u2", count=n, offset=_HEADER.size + pixel_bytes)
    return pixels.reshape(n, c, h, w).astype(np.float32) / 255.0, labels.astype(np.int64)


def load_image_dataset(
    path: Optional[Union[str, Path]] = None,
    synth_spec: Optional[ImageSynthSpec] = None,
    seed: int = 0,
    classes: Optional[int] = None,
) -> DatasetSplit:
    """
    Build an image DatasetSplit from a GIMG file or the synthetic generator.

    Exactly one of ``path`` and ``synth_spec`` must be given. File examples
    are shuffled by ``seed`` before splitting; synthetic examples are
    already in random order.
    """
    if (path is None) == (synth_spec is None):
        raise DatasetError("pass exactly one of path and synth_spec")
    if synth_spec is not None:
        pixels, labels = generate_images(synth_spec, seed)
        classes = synth_spec.classes
        rng = None
        source = "synthetic"
    else:
        pixels, labels = read_image_file(path)
        rng = RngState(seed).child("image_order")
        source = str(path)
    if classes is None:
        classes = int(labels.max()) + 1 if labels.size else 0
    if labels.size and (labels.min() < 0 or labels.max() >= classes):
        raise DatasetError(
            "image label out of range", details={"classes": classes, "max_label": int(labels.max())}
        )
    if not np.all(np.isfinite(pixels)):
        raise DatasetError("image pixels must be finite")

    split = assemble_split(
        TaskName.IMAGES.value,
        list(zip(pixels, labels.tolist())),
        _image_example,
        seed,
        rng=rng,
        meta=(("classes", classes), ("input_shape", list(pixels.shape[1:])), ("source", source)),
    )
    logger.info(f"images ({source}): {split.sizes()} examples of shape {tuple(pixels.shape[1:])}")
    return split
