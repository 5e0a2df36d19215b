"""The capped simplex W_{n,eps}, its KL and Euclidean projections, and 1D filtering."""

from __future__ import annotations

import numpy as np

from .core import DegenerateWeightsError


def cap(n: int, eps: float) -> float:
    """Largest coordinate allowed in W_{n,eps}."""
    return 1.0 / ((1.0 - eps) * n)


def _check_eps(eps: float) -> None:
    if not 0 <= eps < 1:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")


def in_capped_simplex(w, eps: float, atol: float = 1e-9) -> bool:
    w = np.asarray(w, dtype=float)
    n = w.shape[0]
    return bool(np.all(w >= -atol) and abs(w.sum() - 1) <= atol
                and np.all(w <= cap(n, eps) + 1e-12))


def kl_divergence(p, q) -> float:
    """KL(p || q) with the convention 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    mask = p > 0
    if np.any(q[mask] <= 0):
        return float("inf")
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def kl_project(w, eps: float) -> np.ndarray:
    """KL projection of ``w / sum(w)`` onto W_{n,eps}.

    The minimiser has the form ``p_i = min(cap, beta * w_i)``. Coordinates are
    visited in decreasing order of weight, so the number of capped entries and
    then beta are found exactly after one sort.
    """
    _check_eps(eps)
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    total = w.sum()
    if not total > 0:
        raise DegenerateWeightsError("cannot project the all-zero vector")
    w = w / total
    n = w.shape[0]
    c = cap(n, eps)
    if np.count_nonzero(w) * c < 1 - 1e-12:
        raise ValueError("support too small for the capped simplex")
    if w.max() <= c:
        return w

    order = np.argsort(-w, kind="stable")
    ws = w[order]
    # tails[k] = sum of ws[k:]
    tails = np.concatenate([np.cumsum(ws[::-1])[::-1], [0.0]])
    ks = np.arange(1, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = (1 - ks * c) / tails[1:n]
        ok = (tails[1:n] > 0) & (beta * ws[1:n] <= c)
    if not ok.any():
        raise ValueError("support too small for the capped simplex")
    k = int(ks[np.argmax(ok)])
    p = np.empty(n)
    p[order[:k]] = c
    p[order[k:]] = beta[k - 1] * ws[k:]
    return p


def l2_project(w, eps: float, tol: float = 1e-12) -> np.ndarray:
    """Euclidean projection onto W_{n,eps}.

    Bisection on the shift ``theta`` in ``clip(w - theta, 0, cap)``, followed
    by an exact solve for theta on the free coordinates it identifies.
    """
    _check_eps(eps)
    w = np.asarray(w, dtype=float)
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    n = w.shape[0]
    c = cap(n, eps)

    def excess(theta):
        return np.clip(w - theta, 0.0, c).sum() - 1.0

    lo = w.min() - c
    hi = w.max()
    # excess(lo) = n*c - 1 > 0 and excess(hi) = -1
    for _ in range(200):
        if hi - lo <= tol * max(1.0, abs(lo), abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    theta = 0.5 * (lo + hi)

    shifted = w - theta
    upper = shifted >= c
    free = (shifted > 0) & ~upper
    if free.any():
        theta = (w[free].sum() + upper.sum() * c - 1.0) / free.sum()
        p = np.clip(w - theta, 0.0, c)
        # keep the refined solution only if it respects the active set
        if abs(p.sum() - 1.0) <= 1e-12 * n:
            return p
    return np.clip(w - 0.5 * (lo + hi), 0.0, c)


def one_d_filter(w, tau, b: float = 0.25, max_passes: int | None = None) -> np.ndarray:
    """Down-weight until ``sum_i w_i tau_i <= b * sigma0``.

    Each pass multiplies ``w_i`` by ``1 - tau_i / tau_max`` with ``tau_max``
    taken over the currently positive weights, so the point with the largest
    score is zeroed every pass.
    """
    w = np.array(w, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if w.shape != tau.shape:
        raise ValueError("w and tau must have the same shape")
    if not 0 < b < 1:
        raise ValueError(f"b must lie in (0, 1), got {b}")
    if np.any(tau < 0) or np.any(w < 0):
        raise ValueError("w and tau must be nonnegative")
    sigma0 = float(w @ tau)
    if sigma0 <= 0:
        return w
    target = b * sigma0
    limit = w.shape[0] + 1 if max_passes is None else max_passes
    for _ in range(limit):
        if w @ tau <= target:
            break
        tau_max = tau[w > 0].max()
        w *= np.clip(1.0 - tau / tau_max, 0.0, 1.0)
    return w
