"""Deterministic synthetic label images: disks, ellipses, radial blobs.

Instances are placed by rejection sampling. Isolated instances keep a
minimum Euclidean gap to everything already placed; a configurable
fraction of instances is instead placed as touching pairs (4-adjacent,
never overlapping). Every accepted instance is 4-connected with area at
least pi*r_min^2/2. A grayscale rendering (per-instance intensity plus
additive zero-mean noise) accompanies each label image for regression
training.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .edt import squared_edt
from .grid import LabelImage, _label_mask
from .io import write_gray_png, write_label_png

__all__ = ["SynthSpec", "generate", "generate_dataset"]

_MAX_ATTEMPTS = 400


@dataclass(frozen=True)
class SynthSpec:
    seed: int
    width: int = 128
    height: int = 128
    n_instances: int = 6
    shape_kind: str = "disk"  # disk | ellipse | blob
    radius_range: tuple[float, float] = (4.0, 10.0)
    min_gap: int = 2
    touching_fraction: float = 0.0
    noise_amplitude: float = 0.05

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        if self.n_instances < 0:
            raise ValueError("n_instances must be non-negative")
        if self.shape_kind not in ("disk", "ellipse", "blob"):
            raise ValueError(f"unknown shape kind {self.shape_kind!r}")
        if self.radius_range[0] < 2.0 or self.radius_range[1] < self.radius_range[0]:
            raise ValueError("radius_range must satisfy 2 <= min <= max")
        if not 0.0 <= self.touching_fraction <= 1.0:
            raise ValueError("touching_fraction must be in [0, 1]")
        if self.min_gap < 0:
            raise ValueError("min_gap must be non-negative")


class _Shape:
    """Sampled shape parameters, rasterizable at any center."""

    def __init__(self, kind: str, rng: np.random.Generator, radius: float):
        self.radius = radius
        self.kind = kind
        if kind == "ellipse":
            self.minor = radius * rng.uniform(0.6, 1.0)
            self.angle = rng.uniform(0.0, math.pi)
        elif kind == "blob":
            self.amps = rng.uniform(0.0, 1.0, size=3) * np.array([0.12, 0.08, 0.05])
            self.phases = rng.uniform(0.0, 2.0 * math.pi, size=3)

    @property
    def reach(self) -> float:
        return self.radius * 1.3 + 1.0

    def rasterize(self, cx: float, cy: float, width: int, height: int) -> np.ndarray | None:
        """Full-image boolean mask, or None when the shape leaves the canvas."""
        x0 = int(math.floor(cx - self.reach))
        y0 = int(math.floor(cy - self.reach))
        x1 = int(math.ceil(cx + self.reach)) + 1
        y1 = int(math.ceil(cy + self.reach)) + 1
        if x0 < 1 or y0 < 1 or x1 > width - 1 or y1 > height - 1:
            return None  # keep a 1-px clear border
        yy, xx = np.mgrid[y0:y1, x0:x1]
        dx = xx - cx
        dy = yy - cy
        if self.kind == "disk":
            local = dx * dx + dy * dy <= self.radius**2
        elif self.kind == "ellipse":
            c, s = math.cos(self.angle), math.sin(self.angle)
            xr = dx * c + dy * s
            yr = -dx * s + dy * c
            local = (xr / self.radius) ** 2 + (yr / self.minor) ** 2 <= 1.0
        else:  # blob
            theta = np.arctan2(dy, dx)
            rho = self.radius * (
                1.0
                + self.amps[0] * np.cos(2.0 * theta + self.phases[0])
                + self.amps[1] * np.cos(3.0 * theta + self.phases[1])
                + self.amps[2] * np.cos(4.0 * theta + self.phases[2])
            )
            local = dx * dx + dy * dy <= rho * rho
        if not local.any():
            return None
        mask = np.zeros((height, width), dtype=bool)
        mask[y0:y1, x0:x1] = local
        return mask


def _acceptable(mask: np.ndarray, min_area: float) -> bool:
    area = int(mask.sum())
    if area < min_area:
        return False
    ys, xs = np.nonzero(mask)
    crop = mask[ys.min() : ys.max() + 1, xs.min() : xs.max() + 1]
    return int(_label_mask(crop, 4).max()) == 1


def _touches_4(a: np.ndarray, b: np.ndarray) -> bool:
    return bool(
        (a[:-1, :] & b[1:, :]).any()
        or (a[1:, :] & b[:-1, :]).any()
        or (a[:, :-1] & b[:, 1:]).any()
        or (a[:, 1:] & b[:, :-1]).any()
    )


def _occupancy_d2(labels: np.ndarray) -> np.ndarray:
    if not (labels > 0).any():
        return np.full(labels.shape, np.int64(1) << 40)
    return squared_edt(labels > 0)


def generate(spec: SynthSpec) -> tuple[LabelImage, np.ndarray]:
    """Deterministic label image + grayscale rendering for one spec."""
    rng = np.random.default_rng(spec.seed)
    w, h = spec.width, spec.height
    labels = np.zeros((h, w), dtype=np.int32)
    occ_d2 = _occupancy_d2(labels)
    min_area = math.pi * spec.radius_range[0] ** 2 / 2.0
    gap2 = spec.min_gap**2
    n_pairs = int(spec.n_instances * spec.touching_fraction) // 2
    masks: list[np.ndarray] = []

    for k in range(1, spec.n_instances + 1):
        partner = masks[-1] if (k % 2 == 0 and k <= 2 * n_pairs) else None
        placed = False
        for _ in range(_MAX_ATTEMPTS):
            radius = rng.uniform(*spec.radius_range)
            shape = _Shape(spec.shape_kind, rng, radius)
            if partner is None:
                cx = rng.uniform(shape.reach, w - shape.reach)
                cy = rng.uniform(shape.reach, h - shape.reach)
                mask = shape.rasterize(cx, cy, w, h)
                if mask is None or not _acceptable(mask, min_area):
                    continue
                if (occ_d2[mask] < max(gap2, 1)).any():
                    continue  # overlaps or violates the gap
            else:
                mask = _place_touching(rng, shape, partner, labels, k, gap2, w, h, min_area)
                if mask is None:
                    continue
            labels[mask] = k
            masks.append(mask)
            occ_d2 = _occupancy_d2(labels)
            placed = True
            break
        if not placed:
            raise RuntimeError(
                f"failed to place instance {k} after {_MAX_ATTEMPTS} attempts; "
                "reduce n_instances or radius_range, or enlarge the image"
            )

    gray = _render_gray(rng, labels, spec)
    return LabelImage(labels), gray


def _place_touching(rng, shape, partner, labels, k, gap2, w, h, min_area):
    """Scan a candidate center toward the partner until 4-adjacent."""
    pys, pxs = np.nonzero(partner)
    pcx, pcy = pxs.mean(), pys.mean()
    theta = rng.uniform(0.0, 2.0 * math.pi)
    direction = np.array([math.cos(theta), math.sin(theta)])
    others = (labels > 0) & ~partner
    others_d2 = _occupancy_d2(others.astype(np.int32)) if others.any() else None
    start = shape.radius + max((pxs.max() - pxs.min()), (pys.max() - pys.min())) / 2.0 + 2.0
    d = start
    while d >= 1.0:
        cx = pcx + d * direction[0]
        cy = pcy + d * direction[1]
        mask = shape.rasterize(cx, cy, w, h)
        d -= 0.25
        if mask is None:
            continue
        if (mask & (labels > 0)).any():
            return None  # stepped past adjacency into overlap: resample direction
        if not _acceptable(mask, min_area):
            continue
        if others_d2 is not None and (others_d2[mask] < max(gap2, 1)).any():
            return None
        if _touches_4(mask, partner):
            return mask
    return None


def _render_gray(rng, labels, spec) -> np.ndarray:
    img = np.full(labels.shape, 0.10, dtype=np.float64)
    for k in range(1, int(labels.max()) + 1):
        img[labels == k] = rng.uniform(0.5, 0.9)
    img += rng.normal(0.0, spec.noise_amplitude, size=labels.shape)
    return np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)


def generate_dataset(spec: SynthSpec, n_images: int, out_dir: str | Path) -> list[str]:
    """Write images/NNNN.png + labels/NNNN.png pairs; returns the stems.

    Image i uses seed ``spec.seed + i`` so datasets are reproducible and
    extendable.
    """
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    (out_dir / "labels").mkdir(parents=True, exist_ok=True)
    stems = []
    for i in range(n_images):
        per_image = SynthSpec(
            seed=spec.seed + i,
            width=spec.width,
            height=spec.height,
            n_instances=spec.n_instances,
            shape_kind=spec.shape_kind,
            radius_range=spec.radius_range,
            min_gap=spec.min_gap,
            touching_fraction=spec.touching_fraction,
            noise_amplitude=spec.noise_amplitude,
        )
        label_img, gray = generate(per_image)
        stem = f"{i:04d}"
        write_label_png(label_img, out_dir / "labels" / f"{stem}.png")
        write_gray_png(gray, out_dir / "images" / f"{stem}.png")
        stems.append(stem)
    return stems
