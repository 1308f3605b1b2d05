"""Raster file formats.

* Label images: 16-bit single-channel PNG, pixel value = instance id.
* Field maps: "FMAP" binary -- 4-byte magic, u32le width, u32le height,
  then width*height little-endian float32, row-major.
* 8-bit PNG exports for visualization (field value * 255, clamped; label
  maps rendered with a fixed color wheel).

All writers go through a temp-file-then-rename step so partially written
outputs never appear under the final name.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .grid import FieldMap, LabelImage

__all__ = [
    "read_label_png",
    "write_label_png",
    "read_fmap",
    "write_fmap",
    "read_gray_png",
    "write_gray_png",
    "write_field_png",
    "write_label_viz_png",
]

FMAP_MAGIC = b"FMAP"


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _atomic_save_image(img: Image.Image, path: Path) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        img.save(fh, format="PNG")
    os.replace(tmp, path)


def write_label_png(labels: LabelImage, path: str | Path) -> None:
    arr = labels.labels
    if arr.max(initial=0) > 0xFFFF:
        raise ValueError("instance ids exceed 16-bit PNG range")
    img = Image.fromarray(arr.astype(np.uint16))  # mode I;16
    _atomic_save_image(img, Path(path))


def read_label_png(path: str | Path) -> LabelImage:
    path = Path(path)
    with Image.open(path) as img:
        if img.mode not in ("I;16", "I", "L", "P"):
            raise ValueError(f"{path}: unsupported PNG mode {img.mode} for a label image")
        arr = np.asarray(img, dtype=np.int32)
    return LabelImage(arr)


def write_gray_png(values: np.ndarray, path: str | Path) -> None:
    """8-bit grayscale PNG from a uint8 raster."""
    arr = np.asarray(values)
    if arr.dtype != np.uint8:
        raise ValueError(f"expected uint8 raster, got {arr.dtype}")
    _atomic_save_image(Image.fromarray(arr, mode="L"), Path(path))


def read_gray_png(path: str | Path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("L"), dtype=np.uint8)


def write_fmap(field: FieldMap, path: str | Path) -> None:
    header = FMAP_MAGIC + struct.pack("<II", field.width, field.height)
    payload = field.values.astype("<f4").tobytes()
    _atomic_write(Path(path), header + payload)


def read_fmap(path: str | Path) -> FieldMap:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 12 or data[:4] != FMAP_MAGIC:
        raise ValueError(f"{path}: not an FMAP file (bad magic)")
    width, height = struct.unpack("<II", data[4:12])
    expected = 12 + 4 * width * height
    if len(data) != expected:
        raise ValueError(
            f"{path}: truncated or oversized FMAP payload "
            f"(expected {expected} bytes for {width}x{height}, got {len(data)})"
        )
    values = np.frombuffer(data, dtype="<f4", offset=12).reshape(height, width)
    return FieldMap(values.astype(np.float64))


def write_field_png(field: FieldMap, path: str | Path) -> None:
    """Visualization export: value * 255, clamped to [0, 255]."""
    scaled = np.clip(field.values * 255.0, 0.0, 255.0)
    write_gray_png(np.rint(scaled).astype(np.uint8), path)


def _id_palette(n: int) -> np.ndarray:
    """Fixed, id-stable color wheel (golden-angle hues, full saturation)."""
    colors = np.zeros((n + 1, 3), dtype=np.uint8)
    for k in range(1, n + 1):
        hue = (k * 0.61803398875) % 1.0
        i = int(hue * 6.0)
        f = hue * 6.0 - i
        v, p, q, t = 255, 40, int(255 - 215 * f), int(40 + 215 * f)
        rgb = [(v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q)][i % 6]
        colors[k] = rgb
    return colors


def write_label_viz_png(labels_or_map, path: str | Path) -> None:
    """Color-coded instance map as 8-bit RGB PNG (background black)."""
    arr = labels_or_map.labels if isinstance(labels_or_map, LabelImage) else np.asarray(labels_or_map)
    arr = arr.astype(np.int32)
    n = int(arr.max(initial=0))
    rgb = _id_palette(n)[arr]
    _atomic_save_image(Image.fromarray(rgb, mode="RGB"), Path(path))
