"""Exact Euclidean distance transform field maps.

Baseline field: per in-cell pixel, the exact Euclidean distance to the
nearest out-of-cell pixel center (other cells and out-of-image both
count as outside), max-normalized per cell. Computed with the two-pass
separable squared-distance transform: integer vertical scans followed by
a parabola lower-envelope sweep per row, so results are exact (squared
distances are integers).
"""

from __future__ import annotations

import numpy as np

from .grid import FieldMap, LabelImage, extract_regions

__all__ = ["squared_edt", "edt_field_map"]

_INF = np.int64(1) << 40
_DIST_CAP = np.int64(1) << 20  # caps per-axis distances so squares fit in int64


def _vertical_site_distance(sites: np.ndarray) -> np.ndarray:
    """Per column: distance to the nearest site along the column (capped if none)."""
    h, w = sites.shape
    rows = np.arange(h, dtype=np.int64)[:, None]
    marked = np.where(sites, rows, -_INF)
    above = np.maximum.accumulate(marked, axis=0)
    down = rows - above  # distance to nearest site at or above
    marked = np.where(sites, rows, 3 * _INF)
    below = np.minimum.accumulate(marked[::-1], axis=0)[::-1]
    up = below - rows  # distance to nearest site at or below
    d = np.minimum(down, up)
    return np.minimum(d, _DIST_CAP)


def _lower_envelope_row(f: np.ndarray) -> np.ndarray:
    """1-D squared DT: D(x) = min_i ((x - i)^2 + f(i)), f in int64."""
    n = f.shape[0]
    v = np.empty(n, dtype=np.int64)  # parabola sites
    z = np.empty(n + 1, dtype=np.float64)  # envelope breakpoints
    k = 0
    v[0] = 0
    z[0] = -np.inf
    z[1] = np.inf
    for q in range(1, n):
        if f[q] >= _INF:
            continue
        while True:
            p = v[k]
            if f[p] >= _INF:
                k -= 1
                if k < 0:
                    break
                continue
            s = (float(f[q] + q * q) - float(f[p] + p * p)) / (2.0 * (q - p))
            if s <= z[k]:
                k -= 1
                if k < 0:
                    break
            else:
                break
        k += 1
        v[k] = q
        z[k] = s if k > 0 else -np.inf
        z[k + 1] = np.inf
    out = np.empty(n, dtype=np.int64)
    k = 0
    for x in range(n):
        while z[k + 1] < x:
            k += 1
        p = v[k]
        out[x] = (x - p) * (x - p) + f[p] if f[p] < _INF else _INF
    return out


def squared_edt(sites: np.ndarray) -> np.ndarray:
    """Exact squared Euclidean distance to the nearest True pixel.

    Pixels with no site anywhere get a large sentinel (>= 2^40).
    """
    sites = np.asarray(sites, dtype=bool)
    vertical = _vertical_site_distance(sites)
    g = vertical * vertical  # == _INF where no site exists in the column
    out = np.empty_like(g)
    for y in range(g.shape[0]):
        out[y] = _lower_envelope_row(g[y])
    return out


def edt_field_map(labels: LabelImage) -> FieldMap:
    """Per-cell exact EDT, max-normalized to 1; background and other cells 0."""
    out = np.zeros((labels.height, labels.width), dtype=np.float64)
    for region in extract_regions(labels):
        x0, y0, x1, y1 = region.bounding_box
        # everything that is not this cell is a distance site, including
        # other instances inside the bbox and the out-of-image pad ring
        mask = np.pad(region.mask(), 1, constant_values=False)
        d2 = squared_edt(~mask)
        d = np.sqrt(d2[1:-1, 1:-1].astype(np.float64))
        cell = region.mask()
        peak = d[cell].max()
        out[y0:y1, x0:x1][cell] = d[cell] / peak
    return FieldMap(out)
