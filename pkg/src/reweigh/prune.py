"""Diameter reduction before reweighing."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import PromiseViolation, as_points


class PruneFailed(PromiseViolation):
    pass


@dataclass(frozen=True)
class PruneResult:
    kept_indices: np.ndarray
    pivot: np.ndarray
    radius_bound: float
    trials_used: int


def prune_trials(delta: float) -> int:
    return max(1, math.ceil(math.log2(1.0 / delta)))


def prune_ball(points, r: float, eps: float, delta: float, rng=None) -> PruneResult:
    """Keep the points within 2r of a random pivot that sees most of the data.

    Up to ``ceil(log2(1/delta))`` pivots are tried. A pivot is accepted when at
    least ``(1 - eps) n`` points lie within ``2r`` of it. If some
    ``(1 - eps) n`` points sit in a ball of radius r, any pivot drawn from them
    is accepted and keeps all of them, so failure has probability at most
    ``eps ** trials``.

    Raises:
      PruneFailed: no trial accepted (the promise is probably violated).
    """
    x = as_points(points)
    n = x.shape[0]
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if not 0 <= eps < 1:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    rng = np.random.default_rng(rng)
    need = (1.0 - eps) * n
    limit = (2.0 * r) ** 2
    trials = prune_trials(delta)
    for trial in range(1, trials + 1):
        j = int(rng.integers(n))
        diff = x - x[j]
        inside = np.einsum("ij,ij->i", diff, diff) <= limit
        if inside.sum() >= need - 1e-9:
            return PruneResult(np.flatnonzero(inside), x[j].copy(), 2.0 * r, trial)
    raise PruneFailed(f"prune failed after {trials} trials at radius {r:g}")


def coordinate_median(points) -> np.ndarray:
    """Coordinate-wise median; even counts average the two middle values."""
    return np.median(as_points(points), axis=0)


def removal_count(k: int, fraction: float) -> int:
    # round first so 0.01 * 300 does not ceil to 4
    return math.ceil(round(fraction * k, 9))


def mom_prune(bucket_means, reference_means, fraction: float = 0.01) -> np.ndarray:
    """Drop the ``ceil(fraction k)`` bucket means farthest from the reference median.

    Distances are measured to the coordinate-wise median of
    ``reference_means``; ties go against the larger index. Returns the sorted
    indices of the surviving bucket means.
    """
    z = as_points(bucket_means)
    ref = as_points(reference_means)
    k = z.shape[0]
    if k < 2:
        raise ValueError("need at least two bucket means")
    if ref.shape[1] != z.shape[1]:
        raise ValueError("bucket and reference means differ in dimension")
    center = coordinate_median(ref)
    dist = np.linalg.norm(z - center, axis=1)
    drop = removal_count(k, fraction)
    # descending by distance, then by index
    order = np.lexsort((-np.arange(k), -dist))
    keep = np.ones(k, dtype=bool)
    keep[order[:drop]] = False
    return np.flatnonzero(keep)
