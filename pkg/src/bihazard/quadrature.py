"""Tensor-product midpoint quadrature on planar regions, with dyadic refinement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .geometry import LowerRect, Region


@dataclass(frozen=True)
class QuadratureSpec:
    """Midpoint-rule controls: start at `initial` cells per axis, double until
    successive estimates agree to rtol or `max_resolution` is hit."""

    initial: int = 256
    rtol: float = 1e-6
    max_resolution: int = 4096

    def __post_init__(self):
        if not (1 <= self.initial <= self.max_resolution):
            raise ConfigError("need 1 <= initial <= max_resolution")
        if self.rtol <= 0:
            raise ConfigError("rtol must be positive")


@dataclass
class QuadratureResult:
    value: float
    converged: bool
    resolution: int
    last_change: float

    def __float__(self):
        return self.value


def midpoints(hi, k):
    """k cell midpoints of [0, hi]."""
    return (np.arange(k) + 0.5) * (hi / k)


def _eval_once(f, region, bbox, k):
    bx, by = bbox
    if bx == 0.0 or by == 0.0:
        return 0.0
    mx, my = midpoints(bx, k), midpoints(by, k)
    gx, gy = np.meshgrid(mx, my, indexing="ij")
    pts = np.stack([gx, gy], axis=-1)
    vals = np.asarray(f(pts), dtype=float)
    if not isinstance(region, LowerRect):
        vals = np.where(region.contains(pts), vals, 0.0)
    cell = (bx / k) * (by / k)
    return float(vals.sum() * cell)


def integrate_region(f, region, spec=QuadratureSpec(), bbox=None):
    """Integrate a vectorized f over the region.

    For a LowerRect the mesh covers exactly [0, corner]; for other regions
    the mesh covers bbox (default the unit square) and membership masks the
    integrand.  Refinement doubles the per-axis resolution until the
    estimate moves by less than rtol (relative, floored at 1); if the
    budget runs out the last estimate is returned with converged=False.
    """
    if not isinstance(region, Region):
        raise ConfigError("integrate_region needs a Region")
    if isinstance(region, LowerRect):
        box = region.corner
    else:
        box = (1.0, 1.0) if bbox is None else (float(bbox[0]), float(bbox[1]))
    if box[0] == 0.0 or box[1] == 0.0:
        return QuadratureResult(0.0, True, spec.initial, 0.0)
    k = spec.initial
    prev = _eval_once(f, region, box, k)
    change = np.inf
    while k < spec.max_resolution:
        k *= 2
        cur = _eval_once(f, region, box, k)
        change = abs(cur - prev) / max(abs(cur), 1.0)
        if change < spec.rtol:
            return QuadratureResult(cur, True, k, change)
        prev = cur
    return QuadratureResult(prev, False, k, float(change))
