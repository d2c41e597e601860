"""Quality indicators: inverted generational distance and hypervolume.

IGD is the mean Euclidean distance from each reference-front point to its
nearest attained point (lower is better). HV is the exact Lebesgue measure
of the region dominated by the front up to a reference point, computed by
dimension sweep for two and three objectives (higher is better).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .core import Array, ContractViolation


@dataclass
class IndicatorResult:
    name: str
    value: float
    front_size: int
    reference_descriptor: str


def _points(front) -> Array:
    pts = getattr(front, "points", front)
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    return pts


def igd(front, reference) -> float:
    """Mean distance from reference points to the nearest attained point."""
    attained = _points(front)
    ref = _points(reference)
    if attained.shape[0] == 0 or ref.shape[0] == 0:
        raise ContractViolation("igd needs nonempty front and reference sets")
    if attained.shape[1] != ref.shape[1]:
        raise ContractViolation("front and reference objective counts differ")
    return float(cdist(ref, attained).min(axis=1).mean())


def _hv2d(points: Array, ref: Array) -> float:
    """Sweep over f1 ascending; each kept point contributes a fresh strip."""
    order = np.lexsort((points[:, 1], points[:, 0]))
    volume = 0.0
    best_f2 = ref[1]
    for f1, f2 in points[order]:
        if f2 < best_f2:
            volume += (ref[0] - f1) * (best_f2 - f2)
            best_f2 = f2
    return volume


def _hv3d(points: Array, ref: Array) -> float:
    """Slab sweep over f3: 2-D hypervolume of accumulated points per level."""
    order = np.argsort(points[:, 2], kind="stable")
    pts = points[order]
    volume = 0.0
    for i in range(len(pts)):
        level = pts[i, 2]
        next_level = pts[i + 1, 2] if i + 1 < len(pts) else ref[2]
        if next_level > level:
            area = _hv2d(pts[: i + 1, :2], ref[:2])
            volume += area * (next_level - level)
    return volume


def hv(front, reference_point) -> float:
    """Exact hypervolume for two or three objectives.

    Points that fail to strictly dominate the reference point contribute
    nothing and are filtered first; an empty remainder yields 0.
    """
    points = _points(front)
    ref = np.asarray(reference_point, dtype=float)
    m = ref.size
    if m not in (2, 3):
        raise ContractViolation(f"exact hypervolume supports 2 or 3 objectives, got {m}")
    if points.shape[1] != m:
        raise ContractViolation("front and reference point objective counts differ")
    points = points[(points < ref).all(axis=1)]
    if points.shape[0] == 0:
        return 0.0
    if m == 2:
        return float(_hv2d(points, ref))
    return float(_hv3d(points, ref))


def normalized_hv(front, problem_reference) -> float:
    """Hypervolume after normalizing by the true front's ideal and nadir.

    Objectives map affinely so the reference front spans [0, 1] in every
    dimension, then hv is taken against the point (1.1, ..., 1.1).
    """
    points = _points(front)
    ref = _points(problem_reference)
    ideal = ref.min(axis=0)
    nadir = ref.max(axis=0)
    span = nadir - ideal
    degenerate = np.flatnonzero(span == 0.0)
    if degenerate.size:
        raise ContractViolation(
            f"reference front is degenerate in dimension {int(degenerate[0])}"
        )
    scaled = (points - ideal) / span
    return hv(scaled, np.full(ref.shape[1], 1.1))
