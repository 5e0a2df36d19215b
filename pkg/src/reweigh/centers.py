"""Spectral and combinatorial centrality: evaluation, checking and rounding.

A point nu is an (eps, lam)-spectral center when some w in W_{k,eps} has
``||sum_i w_i (x_i - nu)(x_i - nu)^T|| <= lam``, and an (eps, lam)-combinatorial
center when no direction has more than ``eps k`` points projecting at least
``sqrt(lam)`` away from nu. The two notions agree up to constants; this module
provides the pieces needed to check both sides on concrete data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import approx_top_eigenvector, as_points, weighted_second_moment


@dataclass(frozen=True)
class CenterCertificate:
    center: np.ndarray
    kind: str
    level: float
    eps: float
    direction: np.ndarray
    violation: float
    verdict: str = "inconclusive"


def spectral_objective(points, center, w) -> float:
    """``||sum_i w_i (x_i - c)(x_i - c)^T||`` for nonnegative ``w``.

    Dense eigensolver for d <= 64, otherwise a 0.999-approximate power method.
    """
    x = as_points(points)
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    c = np.asarray(center, dtype=float)
    if x.shape[1] <= 64:
        return float(max(np.linalg.eigvalsh(weighted_second_moment(x, w, c))[-1], 0.0))
    return approx_top_eigenvector(x, w, c, c=0.999, alpha=1e-6, rng=0).rayleigh


def direction_scores(points, center, m_or_v) -> np.ndarray:
    """``t_i = (x_i - c)^T M (x_i - c)``, or ``<x_i - c, v>^2`` for a vector."""
    xc = as_points(points) - np.asarray(center, dtype=float)
    a = np.asarray(m_or_v, dtype=float)
    if a.ndim == 1:
        return (xc @ a) ** 2
    return np.einsum("ij,ij->i", xc @ a, xc)


def best_weights_for_direction(points, center, eps: float, m_or_v) -> np.ndarray:
    """Minimiser of ``sum_i w_i t_i`` over W_{k,eps} for fixed scores.

    Puts ``1/((1-eps)k)`` on the ``floor((1-eps)k)`` smallest scores and the
    leftover mass on the next one. Ties are broken by index.
    """
    t = direction_scores(points, center, m_or_v)
    k = t.shape[0]
    if not 0 <= eps < 1:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    c = 1.0 / ((1.0 - eps) * k)
    full = min(k, math.floor(round((1.0 - eps) * k, 9)))
    order = np.argsort(t, kind="stable")
    w = np.zeros(k)
    w[order[:full]] = c
    rest = 1.0 - full * c
    if full < k and rest > 1e-15:
        w[order[full]] = rest
    return w


def combinatorial_check(points, center, threshold: float, directions, return_direction=False):
    """Worst fraction of points with ``|<x_i - c, v>| >= threshold`` over the given directions.

    Args:
      points: (k, d) array.
      center: candidate center.
      threshold: distance along the direction, ``sqrt(lam)`` for level lam.
      directions: (m, d) array of unit vectors.
      return_direction: also return the worst direction.

    Returns:
      The worst fraction, or ``(fraction, direction)``.
    """
    xc = as_points(points) - np.asarray(center, dtype=float)
    v = np.atleast_2d(np.asarray(directions, dtype=float))
    if v.shape[0] == 0 or v.size == 0:
        raise ValueError("need at least one direction")
    if v.shape[1] != xc.shape[1]:
        raise ValueError("directions have the wrong dimension")
    counts = (np.abs(xc @ v.T) >= threshold).sum(axis=0)
    j = int(np.argmax(counts))
    frac = counts[j] / xc.shape[0]
    if return_direction:
        return float(frac), v[j].copy()
    return float(frac)


def angle_grid(m: int) -> np.ndarray:
    """``m`` unit vectors in the plane at angles ``pi j / m`` (a half circle suffices)."""
    theta = np.pi * np.arange(m) / m
    return np.column_stack([np.cos(theta), np.sin(theta)])


def max_count_2d(points, center, threshold: float):
    """Exact maximum over all planar unit v of ``#{i : |<x_i - c, v>| >= threshold}``.

    For each point the violating directions form a closed arc (mod pi) around
    its own angle; a sweep over arc endpoints finds the deepest overlap.

    Returns:
      (count, direction) with direction a unit vector attaining the count.
    """
    xc = as_points(points) - np.asarray(center, dtype=float)
    if xc.shape[1] != 2:
        raise ValueError("max_count_2d needs planar points")
    if threshold <= 0:
        return xc.shape[0], np.array([1.0, 0.0])
    r = np.linalg.norm(xc, axis=1)
    hit = r >= threshold
    if not hit.any():
        return 0, np.array([1.0, 0.0])
    phi = np.arctan2(xc[hit, 1], xc[hit, 0]) % np.pi
    half = np.arccos(np.clip(threshold / r[hit], -1.0, 1.0))
    # candidate directions: every arc endpoint and center, all mod pi
    cand = np.concatenate([phi - half, phi + half, phi]) % np.pi
    v = np.column_stack([np.cos(cand), np.sin(cand)])
    proj = np.abs(xc[hit] @ v.T)
    counts = (proj >= threshold * (1 - 1e-12)).sum(axis=0)
    j = int(np.argmax(counts))
    return int(counts[j]), v[j]


def gaussian_round(m, rng=None) -> np.ndarray:
    """Draw ``g ~ N(0, M)`` and return ``g / ||g||``.

    Raises:
      ValueError: M is numerically zero.
    """
    m = np.asarray(m, dtype=float)
    m = (m + m.T) / 2
    vals, vecs = np.linalg.eigh(m)
    vals = np.clip(vals, 0.0, None)
    if vals.max() <= 1e-14 * max(1.0, abs(np.trace(m))):
        raise ValueError("cannot round a zero matrix")
    rng = np.random.default_rng(rng)
    for _ in range(100):
        g = vecs @ (np.sqrt(vals) * rng.standard_normal(vals.shape[0]))
        ng = np.linalg.norm(g)
        if ng > 0:
            return g / ng
    raise ValueError("gaussian rounding produced only zero vectors")


def certify(points, center, lam: float, eps: float, draws: int = 5000, grid: int = 3600,
            rng=None) -> CenterCertificate:
    """Check the combinatorial condition at level lam and report a verdict.

    In the plane the check is exact and can certify (``certified-2d``). In
    higher dimension only falsification is possible: random directions,
    Gaussian roundings of the second moment and its top eigenvector are
    tried, and a clean run is ``inconclusive``.
    """
    x = as_points(points)
    c = np.asarray(center, dtype=float)
    k, d = x.shape
    thr = math.sqrt(lam)
    if d == 2:
        count, v = max_count_2d(x, c, thr)
        frac = count / k
        verdict = "certified-2d" if frac <= eps else "falsified"
        return CenterCertificate(c, "combinatorial", lam, eps, v, frac, verdict)
    rng = np.random.default_rng(rng)
    dirs = [rng.standard_normal((draws, d))]
    w = np.full(k, 1.0 / k)
    m = weighted_second_moment(x, w, c)
    if np.trace(m) > 0:
        vals, vecs = np.linalg.eigh(m)
        dirs.append(vecs[:, -1][None, :])
        dirs.append(np.array([gaussian_round(m / np.trace(m), rng) for _ in range(min(draws, 500))]))
    if d == 1:
        dirs.append(np.ones((1, 1)))
    v = np.vstack(dirs)
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    frac, worst = combinatorial_check(x, c, thr, v, return_direction=True)
    verdict = "falsified" if frac > eps else "inconclusive"
    return CenterCertificate(c, "combinatorial", lam, eps, worst, frac, verdict)


def signature_bound(lam: float, eps: float, norm_w: float) -> float:
    """Distance bound ``(sqrt(2 lam) + sqrt(eps ||M(w')||)) / (1 - 2 eps)`` under the promise."""
    return (math.sqrt(2 * lam) + math.sqrt(eps * norm_w)) / (1 - 2 * eps)


def signature_bound_sharp(lam: float, eps: float, norm_w: float) -> float:
    """Variant ``(sqrt(lam) + sqrt(2 eps lam) + sqrt(eps ||M(w')||)) / (1 - 2 eps)``."""
    return (math.sqrt(lam) + math.sqrt(2 * eps * lam) + math.sqrt(eps * norm_w)) / (1 - 2 * eps)


def subgaussian_signature_bound(excess: float, eps: float, const: float) -> float:
    """``(sqrt(eps * excess) + C eps sqrt(log(1/eps))) / (1 - eps)`` for ``||M(w)|| <= 1 + excess``."""
    return (math.sqrt(eps * max(excess, 0.0)) + const * eps * math.sqrt(math.log(1 / eps))) / (1 - eps)


def refined_signature_bound(sigma_norm: float, eps: float, norm_w: float) -> float:
    """Right side ``sqrt(2 eps ||Sigma||) + sqrt(eps ||Sigma(w)||)`` for mostly-good weights.

    The left side it bounds is the good mass times the distance to mu(w).
    """
    return math.sqrt(2 * eps * sigma_norm) + math.sqrt(eps * norm_w)
