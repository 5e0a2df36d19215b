"""Dense linear-algebra primitives shared by every solver.

Points are stored row-major as an ``(n, d)`` float array. Weighted second
moments are only ever touched through matrix-vector products, except where
the power method is cheaper on an assembled ``d x d`` Gram matrix.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np


class ReweighError(Exception):
    """Base class for errors raised by this package."""


class DegenerateWeightsError(ReweighError, ValueError):
    pass


class PromiseViolation(ReweighError):
    """The input does not appear to satisfy the centrality promise."""


class EigenEstimate(NamedTuple):
    vector: np.ndarray
    rayleigh: float
    degenerate: bool


def as_points(points) -> np.ndarray:
    """Validate and return points as a 2-D float array."""
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError(f"points must be an (n, d) array with n, d >= 1, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("points contain non-finite entries")
    return x


def _check_weights(w, n: int) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (n,):
        raise ValueError(f"weights have shape {w.shape}, expected ({n},)")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    return w


def weighted_mean(points, w) -> np.ndarray:
    """Return sum_i w_i x_i / sum_i w_i."""
    x = as_points(points)
    w = _check_weights(w, x.shape[0])
    total = w.sum()
    if not total > 0:
        raise DegenerateWeightsError("degenerate weights")
    return (w @ x) / total


def weighted_cov_apply(points, w, center, v) -> np.ndarray:
    """Compute ``M v`` for ``M = sum_i w_i (x_i - c)(x_i - c)^T`` without forming M."""
    x = as_points(points)
    w = _check_weights(w, x.shape[0])
    center = np.asarray(center, dtype=float)
    v = np.asarray(v, dtype=float)
    d = x.shape[1]
    if center.shape != (d,) or v.shape != (d,):
        raise ValueError(f"dimension mismatch: d={d}, center {center.shape}, v {v.shape}")
    xc = x - center
    return xc.T @ (w * (xc @ v))


def weighted_second_moment(points, w, center) -> np.ndarray:
    """Assemble the ``d x d`` weighted second moment about ``center``."""
    xc = as_points(points) - np.asarray(center, dtype=float)
    w = np.asarray(w, dtype=float)
    m = xc.T @ (w[:, None] * xc)
    return (m + m.T) / 2


def power_steps(c: float, alpha: float, n: int, d: int) -> int:
    """Number of power iterations for a c-approximate top eigenvector w.p. 1 - alpha."""
    if not 0 < c < 1:
        raise ValueError(f"approximation factor must lie in (0, 1), got {c}")
    if not 0 < alpha < 1:
        raise ValueError(f"failure probability must lie in (0, 1), got {alpha}")
    return max(1, math.ceil(math.log(d * n / alpha) / (1 - c)))


def _matrix_power_apply(g: np.ndarray, k: int, v: np.ndarray) -> np.ndarray:
    # g^k v by repeated squaring; each factor is rescaled so nothing overflows.
    out = v.copy()
    base = g.copy()
    while k:
        if k & 1:
            out = base @ out
            s = np.abs(out).max()
            if s == 0:
                return out
            out /= s
        k >>= 1
        if k:
            base = base @ base
            s = np.abs(base).max()
            if s == 0:
                return base @ out
            base /= s
    return out


def approx_top_eigenvector(points, w, center, c: float = 7 / 8, alpha: float = 0.01,
                           rng=None) -> EigenEstimate:
    """Power-method estimate of the top eigenvector of the weighted second moment.

    Args:
      points: (n, d) array.
      w: nonnegative weights (need not sum to one).
      center: point the second moment is taken about.
      c: target approximation, ``v^T M v >= c ||M||`` with probability
        at least ``1 - alpha``.
      alpha: failure probability; sets the number of power steps to
        ``ceil(ln(d n / alpha) / (1 - c))``.
      rng: seed or ``numpy.random.Generator`` for the random start.

    Returns:
      EigenEstimate(vector, rayleigh, degenerate). When M is numerically
      zero the vector is e_1, rayleigh is 0 and ``degenerate`` is True.
    """
    x = as_points(points)
    w = _check_weights(w, x.shape[0])
    xc = x - np.asarray(center, dtype=float)
    return top_eigenvector_centered(xc, w, c, alpha, np.random.default_rng(rng),
                                    scale=float(np.max(np.einsum("ij,ij->i", x, x))))


def top_eigenvector_centered(xc: np.ndarray, w: np.ndarray, c: float, alpha: float,
                             rng: np.random.Generator, scale: float | None = None) -> EigenEstimate:
    """Power method on already-centred, already-validated points (solver inner loops)."""
    n, d = xc.shape
    steps = power_steps(c, alpha, n, d)
    v0 = rng.standard_normal(d)

    a = xc * np.sqrt(w)[:, None]
    trace = float(np.einsum("ij,ij->", a, a))
    if scale is None:
        scale = float(np.max(np.einsum("ij,ij->i", xc, xc)))
    if trace <= 1e-20 * (scale + 1.0) * max(float(w.sum()), 1e-300):
        e1 = np.zeros(d)
        e1[0] = 1.0
        return EigenEstimate(e1, 0.0, True)

    if d == 1:
        return EigenEstimate(np.ones(1), trace, False)

    if steps > d and n >= d:
        g = a.T @ a
        g = (g + g.T) / 2
        v = _matrix_power_apply(g, steps, v0)
        nv = np.linalg.norm(v)
        if nv == 0:
            v = v0
            nv = np.linalg.norm(v)
        v = v / nv
        return EigenEstimate(v, float(v @ g @ v), False)

    v = v0 / np.linalg.norm(v0)
    for _ in range(steps):
        u = a.T @ (a @ v)
        nu = np.linalg.norm(u)
        if nu == 0:
            break
        v = u / nu
    av = a @ v
    return EigenEstimate(v, float(av @ av), False)


def spectral_norm(points, w, center, rng=None) -> float:
    """High-accuracy ``||sum_i w_i (x_i - c)(x_i - c)^T||``.

    Dense symmetric eigensolver for d <= 500, otherwise a 0.99-approximate
    power method.
    """
    x = as_points(points)
    d = x.shape[1]
    if d <= 500:
        m = weighted_second_moment(x, w, center)
        return float(max(np.linalg.eigvalsh(m)[-1], 0.0))
    return approx_top_eigenvector(x, w, center, c=0.99, alpha=1e-6, rng=rng).rayleigh


def squared_diameter(points, exact_limit: int = 2000) -> float:
    """Squared diameter of the point set.

    Exact for n <= ``exact_limit``; beyond that the bound
    ``(2 max_i ||x_i - mean||)^2`` is returned, which is never smaller.
    """
    x = as_points(points)
    n = x.shape[0]
    if n <= exact_limit:
        sq = np.einsum("ij,ij->i", x, x)
        best = 0.0
        for start in range(0, n, 256):
            blk = x[start:start + 256]
            d2 = sq[start:start + 256, None] + sq[None, :] - 2 * blk @ x.T
            best = max(best, float(d2.max()))
        return max(best, 0.0)
    xc = x - x.mean(axis=0)
    return float(4 * np.max(np.einsum("ij,ij->i", xc, xc)))
