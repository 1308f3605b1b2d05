"""Core raster types and per-instance region extraction.

Conventions used throughout the package:

* Rasters are 2-D numpy arrays indexed ``[y, x]`` (row-major).
* Public coordinates are ``(x, y)`` pairs.
* Label id 0 is background; ids 1..n are cell instances.
* All types are immutable after construction (the wrapped arrays are
  marked read-only), so they can be shared freely across threads.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LabelImage",
    "FieldMap",
    "Region",
    "Segmentation",
    "extract_regions",
    "boundary_pixels",
    "relabel_connected",
]

# 4-neighborhood offsets as (dx, dy)
N4_OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1))
# 8-neighborhood adds the diagonals
N8_OFFSETS = N4_OFFSETS + ((1, 1), (1, -1), (-1, 1), (-1, -1))


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    if out is arr and arr.flags.writeable:
        out = arr.copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class LabelImage:
    """Integer instance map: 0 = background, k >= 1 = cell instance k."""

    labels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.labels)
        if arr.ndim != 2:
            raise ValueError(f"label raster must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"label raster must be at least 1x1, got {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError(f"label raster must be integer, got dtype {arr.dtype}")
        if arr.min(initial=0) < 0:
            raise ValueError("label raster contains negative ids")
        object.__setattr__(self, "labels", _freeze(arr.astype(np.int32, copy=False)))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def max_id(self) -> int:
        return int(self.labels.max())


@dataclass(frozen=True)
class FieldMap:
    """Scalar raster; ground-truth fields live in [0, 1] with background 0."""

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"field raster must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"field raster must be at least 1x1, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("field raster contains non-finite values")
        object.__setattr__(self, "values", _freeze(arr))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Region:
    """One labeled instance: its pixels, bounding box, centroid and source pixel.

    ``pixels`` is an (n, 2) array of (x, y) coordinates in raster order.
    ``bounding_box`` is (x0, y0, x1, y1) with x1/y1 exclusive.
    ``source_pixel`` is the rounded centroid when that lies inside the
    region, otherwise the in-region pixel farthest from the boundary
    (ties broken by raster order).
    """

    instance_id: int
    pixels: np.ndarray
    bounding_box: tuple[int, int, int, int]
    centroid: tuple[float, float]
    source_pixel: tuple[int, int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "pixels", _freeze(np.asarray(self.pixels, dtype=np.int32)))

    @property
    def area(self) -> int:
        return self.pixels.shape[0]

    def mask(self) -> np.ndarray:
        """Boolean mask over the bounding box (local coordinates)."""
        x0, y0, x1, y1 = self.bounding_box
        m = np.zeros((y1 - y0, x1 - x0), dtype=bool)
        m[self.pixels[:, 1] - y0, self.pixels[:, 0] - x0] = True
        return m


@dataclass(frozen=True)
class Segmentation:
    """Recovered instance map plus its background mask.

    Invariant: ``instance_map == 0`` exactly where ``background_mask``.
    """

    instance_map: np.ndarray
    background_mask: np.ndarray

    def __post_init__(self) -> None:
        inst = np.asarray(self.instance_map, dtype=np.int32)
        bg = np.asarray(self.background_mask, dtype=bool)
        if inst.shape != bg.shape:
            raise ValueError("instance map and background mask shapes differ")
        if not np.array_equal(inst == 0, bg):
            raise ValueError("background mask must be true exactly where instance map is 0")
        object.__setattr__(self, "instance_map", _freeze(inst))
        object.__setattr__(self, "background_mask", _freeze(bg))

    @property
    def height(self) -> int:
        return self.instance_map.shape[0]

    @property
    def width(self) -> int:
        return self.instance_map.shape[1]

    @property
    def n_instances(self) -> int:
        return int(self.instance_map.max())


def _dist2_to_set(pixels: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Exact squared Euclidean distance from each pixel to the nearest target."""
    dx = pixels[:, 0:1].astype(np.int64) - targets[:, 0].astype(np.int64)
    dy = pixels[:, 1:2].astype(np.int64) - targets[:, 1].astype(np.int64)
    return (dx * dx + dy * dy).min(axis=1)


def _pick_source_pixel(pixels: np.ndarray, centroid: tuple[float, float],
                       boundary: np.ndarray) -> tuple[int, int]:
    cx, cy = centroid
    # A centroid exactly on a pixel edge (fraction 1/2) has no canonical
    # rounding, and any fixed convention would break under grid
    # symmetries; fall through to the farthest-from-boundary rule then.
    ambiguous = (cx - np.floor(cx)) == 0.5 or (cy - np.floor(cy)) == 0.5
    if not ambiguous:
        rx, ry = int(np.rint(cx)), int(np.rint(cy))
        if ((pixels[:, 0] == rx) & (pixels[:, 1] == ry)).any():
            return rx, ry
    # Centroid outside the region (non-convex cell) or ambiguous: take the
    # pixel farthest from the boundary; pixels are in raster order so
    # argmax breaks ties toward the first one.
    d2 = _dist2_to_set(pixels, boundary)
    best = int(np.argmax(d2))
    return int(pixels[best, 0]), int(pixels[best, 1])


def _boundary_coords(labels: np.ndarray, instance_id: int) -> np.ndarray:
    """(x, y) coordinates of in-region pixels with a 4-neighbor outside."""
    mask = labels == instance_id
    padded = np.pad(mask, 1, constant_values=False)
    interior = (
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    edge = mask & ~interior
    ys, xs = np.nonzero(edge)
    return np.column_stack([xs, ys]).astype(np.int32)


def extract_regions(labels: LabelImage) -> list[Region]:
    """Split a label image into one Region per nonzero id, sorted by id.

    Raises ValueError when the labeling is not compact (an id in 1..max
    never occurs). Emits a warning when an instance is not 4-connected,
    which ground-truth data is assumed to avoid.
    """
    arr = labels.labels
    n = int(arr.max())
    if n == 0:
        return []
    counts = np.bincount(arr.ravel(), minlength=n + 1)
    missing = np.nonzero(counts[1:] == 0)[0] + 1
    if missing.size:
        raise ValueError(f"label image is not compactly labeled: missing id {int(missing[0])}")

    regions: list[Region] = []
    for k in range(1, n + 1):
        ys, xs = np.nonzero(arr == k)
        pixels = np.column_stack([xs, ys]).astype(np.int32)
        x0, x1 = int(xs.min()), int(xs.max()) + 1
        y0, y1 = int(ys.min()), int(ys.max()) + 1
        centroid = (float(xs.mean()), float(ys.mean()))
        boundary = _boundary_coords(arr, k)
        source = _pick_source_pixel(pixels, centroid, boundary)
        region = Region(
            instance_id=k,
            pixels=pixels,
            bounding_box=(x0, y0, x1, y1),
            centroid=centroid,
            source_pixel=source,
        )
        if _count_components(region.mask(), 4) != 1:
            warnings.warn(f"instance {k} is not a single 4-connected component", stacklevel=2)
        regions.append(region)
    return regions


def boundary_pixels(region: Region, labels: LabelImage) -> set[tuple[int, int]]:
    """Inner boundary: in-region pixels with a 4-neighbor outside the region."""
    coords = _boundary_coords(labels.labels, region.instance_id)
    return {(int(x), int(y)) for x, y in coords}


def _count_components(mask: np.ndarray, connectivity: int) -> int:
    return int(_label_mask(mask, connectivity).max())


def _label_mask(mask: np.ndarray, connectivity: int) -> np.ndarray:
    """BFS component labeling in raster-scan discovery order."""
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    offsets = N4_OFFSETS if connectivity == 4 else N8_OFFSETS
    h, w = mask.shape
    out = np.zeros((h, w), dtype=np.int32)
    next_id = 0
    ys, xs = np.nonzero(mask)  # raster order
    for y, x in zip(ys.tolist(), xs.tolist()):
        if out[y, x]:
            continue
        next_id += 1
        out[y, x] = next_id
        queue = deque([(x, y)])
        while queue:
            px, py = queue.popleft()
            for dx, dy in offsets:
                qx, qy = px + dx, py + dy
                if 0 <= qx < w and 0 <= qy < h and mask[qy, qx] and not out[qy, qx]:
                    out[qy, qx] = next_id
                    queue.append((qx, qy))
    return out


def relabel_connected(mask: np.ndarray, connectivity: int = 4) -> LabelImage:
    """Label connected components 1..n in raster-scan discovery order."""
    mask = np.asarray(mask, dtype=bool)
    return LabelImage(_label_mask(mask, connectivity))
