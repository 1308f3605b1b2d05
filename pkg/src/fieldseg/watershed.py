"""Field-map segmentation: background threshold, h-minima markers, flood.

The pipeline inverts the field on the foreground (g = 1 - U, background
excluded), suppresses minima shallower than h by morphological
reconstruction by erosion of g + h over g, takes the regional minima of
the reconstruction as markers, and priority-floods the inverted field
from those markers. Background pixels are never claimed; ridge pixels go
to the first-arriving basin (FIFO tie-break on equal priority), which
makes the whole procedure deterministic.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass

import numpy as np

from .grid import FieldMap, Segmentation, _freeze

__all__ = [
    "WatershedParams",
    "MarkerSet",
    "background_mask",
    "hminima_markers",
    "flood",
    "segment",
]

_OFFSETS = {
    4: ((1, 0), (-1, 0), (0, 1), (0, -1)),
    8: ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)),
}


@dataclass(frozen=True)
class WatershedParams:
    background_epsilon: float = 0.05
    h: float = 0.30
    connectivity: int = 8

    def __post_init__(self) -> None:
        if not 0.0 < self.background_epsilon < 1.0:
            raise ValueError("background_epsilon must be in (0, 1)")
        if not 0.0 < self.h <= 1.0:
            raise ValueError("h must be in (0, 1]")
        if self.connectivity not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")


@dataclass(frozen=True)
class MarkerSet:
    markers: np.ndarray
    count: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "markers", _freeze(np.asarray(self.markers, dtype=np.int32)))


def background_mask(field: FieldMap, eps: float) -> np.ndarray:
    """True exactly where the field value is below eps."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must be in (0, 1)")
    return field.values < eps


def _neighbor_reduce(arr: np.ndarray, connectivity: int, fill: float) -> np.ndarray:
    """Min over the (strict) neighborhood of each pixel."""
    padded = np.pad(arr, 1, constant_values=fill)
    h, w = arr.shape
    out = np.full_like(arr, fill)
    for dx, dy in _OFFSETS[connectivity]:
        np.minimum(out, padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w], out)
    return out


def _reconstruct_erosion(seed: np.ndarray, mask_img: np.ndarray, connectivity: int) -> np.ndarray:
    """Morphological reconstruction by erosion of seed over mask (seed >= mask).

    Out-of-domain pixels must hold +inf in both images. Iterated
    erode-and-clamp converges exactly because pixel values only move
    down through the finite set of values present in the seed and mask.
    """
    rec = seed.copy()
    while True:
        eroded = np.minimum(rec, _neighbor_reduce(rec, connectivity, np.inf))
        nxt = np.maximum(mask_img, eroded)
        if np.array_equal(nxt, rec):
            return rec
        rec = nxt


def _regional_minima_labels(values: np.ndarray, domain: np.ndarray, connectivity: int) -> tuple[np.ndarray, int]:
    """Label regional-minimum plateaus in raster discovery order."""
    h, w = values.shape
    offsets = _OFFSETS[connectivity]
    neighbor_min = _neighbor_reduce(np.where(domain, values, np.inf), connectivity, np.inf)
    has_lower = domain & (neighbor_min < values)

    labels = np.zeros((h, w), dtype=np.int32)
    visited = np.zeros((h, w), dtype=bool)
    next_id = 0
    ys, xs = np.nonzero(domain)
    for y, x in zip(ys.tolist(), xs.tolist()):
        if visited[y, x]:
            continue
        # flood the equal-valued plateau containing (x, y)
        level = values[y, x]
        plateau = [(x, y)]
        visited[y, x] = True
        queue = deque(plateau)
        is_min = not has_lower[y, x]
        while queue:
            px, py = queue.popleft()
            for dx, dy in offsets:
                qx, qy = px + dx, py + dy
                if 0 <= qx < w and 0 <= qy < h and domain[qy, qx] and not visited[qy, qx] \
                        and values[qy, qx] == level:
                    visited[qy, qx] = True
                    if has_lower[qy, qx]:
                        is_min = False
                    plateau.append((qx, qy))
                    queue.append((qx, qy))
        if is_min:
            next_id += 1
            for px, py in plateau:
                labels[py, px] = next_id
    return labels, next_id


def hminima_markers(field: FieldMap, background: np.ndarray, h: float,
                    connectivity: int = 8) -> MarkerSet:
    """Markers = regional minima of the h-minima transform of 1 - field.

    The transform is the reconstruction by erosion of (g + h) over g with
    g the inverted field restricted to the foreground; minima shallower
    than h are suppressed, the survivors become markers labeled in raster
    discovery order.
    """
    if not 0.0 < h <= 1.0:
        raise ValueError("h must be in (0, 1]")
    domain = ~np.asarray(background, dtype=bool)
    g = np.where(domain, 1.0 - field.values, np.inf)
    rec = _reconstruct_erosion(g + h, g, connectivity)
    labels, count = _regional_minima_labels(rec, domain, connectivity)
    return MarkerSet(markers=labels, count=count)


def flood(field: FieldMap, markers: MarkerSet, background: np.ndarray,
          connectivity: int = 8) -> Segmentation:
    """Priority-flood of the inverted field from the markers.

    Queue is keyed by (inverted value, insertion sequence), so plateaus
    resolve first-in-first-out and the result is deterministic. The
    background is never claimed; foreground pixels unreachable from any
    marker end up as background in the output.
    """
    g = 1.0 - field.values
    h, w = g.shape
    bg = np.asarray(background, dtype=bool)
    offsets = _OFFSETS[connectivity]
    out = markers.markers.copy()
    out[bg] = 0
    heap: list[tuple[float, int, int, int]] = []
    seq = 0
    ys, xs = np.nonzero(out)
    for y, x in zip(ys.tolist(), xs.tolist()):
        heap.append((g[y, x], seq, x, y))
        seq += 1
    heapq.heapify(heap)
    while heap:
        _, _, x, y = heapq.heappop(heap)
        label = out[y, x]
        for dx, dy in offsets:
            qx, qy = x + dx, y + dy
            if 0 <= qx < w and 0 <= qy < h and not bg[qy, qx] and out[qy, qx] == 0:
                out[qy, qx] = label
                heapq.heappush(heap, (g[qy, qx], seq, qx, qy))
                seq += 1
    return Segmentation(instance_map=out, background_mask=out == 0)


def segment(field: FieldMap, params: WatershedParams | None = None) -> Segmentation:
    """background threshold -> invert -> h-minima markers -> flood."""
    params = params or WatershedParams()
    bg = background_mask(field, params.background_epsilon)
    markers = hminima_markers(field, bg, params.h, params.connectivity)
    return flood(field, markers, bg, params.connectivity)
