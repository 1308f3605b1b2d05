"""Diffusion field maps: repeated unit heat injection + masked averaging.

Each step adds 1 at every active instance's source pixel and then
replaces every in-cell value by a 3x3 average that ignores out-of-cell
neighbors. Two boundary rules are provided:

* ``leaky_denominator_9`` (default): out-of-cell neighbors contribute 0
  but the denominator stays 9. The boundary leak balances the persistent
  injection, so raw values reach a fixed point; convergence is a drop of
  the per-cell L2 change below ``convergence_epsilon``.
* ``renormalized``: the average runs over in-cell neighbors only (no
  leak). Raw values then grow without bound under persistent injection,
  so convergence is declared when the max-normalized shape stabilizes.

Instances are relaxed independently (the averaging never crosses cell
boundaries), each frozen at its own convergence; afterwards every cell
is scaled by its own maximum, background stays 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import FieldMap, LabelImage, Region, extract_regions

__all__ = [
    "DiffusionConfig",
    "DiffusionReport",
    "diffusion_step",
    "run_diffusion",
    "diffusion_field_map",
]

LEAKY = "leaky_denominator_9"
RENORMALIZED = "renormalized"


@dataclass(frozen=True)
class DiffusionConfig:
    convergence_epsilon: float = 0.01
    max_iterations: int = 100_000
    boundary_rule: str = LEAKY

    def __post_init__(self) -> None:
        if self.convergence_epsilon <= 0.0:
            raise ValueError("convergence_epsilon must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.boundary_rule not in (LEAKY, RENORMALIZED):
            raise ValueError(f"unknown boundary rule {self.boundary_rule!r}")


@dataclass(frozen=True)
class DiffusionReport:
    iterations: dict[int, int] = field(default_factory=dict)
    converged: dict[int, bool] = field(default_factory=dict)


class _RegionState:
    """Reusable padded buffers for one instance's relaxation."""

    def __init__(self, region: Region, rule: str):
        self.region = region
        mask = region.mask()
        hb, wb = mask.shape
        self.mask = mask
        self.u = np.zeros((hb + 2, wb + 2), dtype=np.float64)
        x0, y0, _, _ = region.bounding_box
        sx, sy = region.source_pixel
        self.src = (sy - y0 + 1, sx - x0 + 1)
        if rule == RENORMALIZED:
            mpad = np.pad(mask.astype(np.float64), 1)
            self.denom = _box9(mpad)[mask]
        else:
            self.denom = None  # leaky: fixed denominator 9

    def inner(self) -> np.ndarray:
        return self.u[1:-1, 1:-1]


def _box9(padded: np.ndarray) -> np.ndarray:
    """3x3 box sum of the unpadded interior, via separable column/row sums."""
    cols = padded[:-2, :] + padded[1:-1, :] + padded[2:, :]
    return cols[:, :-2] + cols[:, 1:-1] + cols[:, 2:]


def _step(state: _RegionState) -> np.ndarray:
    """One injection + masked-average step; returns new in-cell values."""
    state.u[state.src] += 1.0
    total = _box9(state.u)[state.mask]
    if state.denom is None:
        return total / 9.0
    return total / state.denom


def _l2_change(new: np.ndarray, old: np.ndarray) -> float:
    # sorted accumulation keeps the norm invariant under pixel reordering
    d2 = np.sort((new - old) ** 2)
    return float(np.sqrt(d2.sum()))


def _shape(values: np.ndarray) -> np.ndarray:
    peak = values.max()
    return values / peak if peak > 0.0 else values


def _relax_region(region: Region, config: DiffusionConfig) -> tuple[np.ndarray, int, bool, float]:
    """Iterate one instance to convergence.

    Returns (raw in-cell values aligned with region.pixels, iterations,
    converged, last delta).
    """
    state = _RegionState(region, config.boundary_rule)
    mask = state.mask
    renorm = config.boundary_rule == RENORMALIZED
    old = state.inner()[mask]
    delta = np.inf
    for iteration in range(1, config.max_iterations + 1):
        new = _step(state)
        if renorm:
            delta = _l2_change(_shape(new), _shape(old))
        else:
            delta = _l2_change(new, old)
        state.inner()[mask] = new
        old = new
        if delta < config.convergence_epsilon:
            return new, iteration, True, delta
    return old, config.max_iterations, False, delta


def diffusion_step(field: FieldMap, regions: list[Region], config: DiffusionConfig) -> FieldMap:
    """One synchronized step applied to every listed (unconverged) instance.

    Pixels of instances not listed, and the background, are untouched.
    """
    out = field.values.copy()
    for region in regions:
        x0, y0, x1, y1 = region.bounding_box
        state = _RegionState(region, config.boundary_rule)
        window = out[y0:y1, x0:x1]
        state.inner()[state.mask] = window[state.mask]
        window[state.mask] = _step(state)
    return FieldMap(out)


def run_diffusion(
    labels: LabelImage, config: DiffusionConfig | None = None
) -> tuple[FieldMap, DiffusionReport]:
    """Relax every instance to convergence and max-normalize per cell.

    Raises RuntimeError when any instance fails to converge within
    ``max_iterations``, listing the offenders and their last deltas.
    """
    config = config or DiffusionConfig()
    out = np.zeros((labels.height, labels.width), dtype=np.float64)
    iterations: dict[int, int] = {}
    converged: dict[int, bool] = {}
    failures: list[str] = []
    for region in extract_regions(labels):
        raw, iters, ok, delta = _relax_region(region, config)
        iterations[region.instance_id] = iters
        converged[region.instance_id] = ok
        if not ok:
            failures.append(f"instance {region.instance_id} (last delta {delta:.3e})")
            continue
        out[region.pixels[:, 1], region.pixels[:, 0]] = raw / raw.max()
    if failures:
        raise RuntimeError(
            f"diffusion did not converge within {config.max_iterations} iterations for: "
            + ", ".join(failures)
        )
    return FieldMap(out), DiffusionReport(iterations=iterations, converged=converged)


def diffusion_field_map(labels: LabelImage, config: DiffusionConfig | None = None) -> FieldMap:
    field, _ = run_diffusion(labels, config)
    return field
