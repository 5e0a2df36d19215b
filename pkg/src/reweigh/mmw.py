"""Matrix multiplicative weights solver for spectral sample reweighing.

The solver runs in epochs. Each epoch starts from the current weights with
norm ``lambda_0 = ||M(w)||`` and repeatedly scores points against a density
matrix ``U`` built from the second moments seen so far in the epoch; when the
``U``-weighted score sum is too large the 1D filter removes weight. An epoch
ends once ``||M(w)|| <= (2/3) lambda_0``, and the solver returns as soon as an
epoch starts at or below ``300 lambda``.

Weights are never renormalised inside the loop: they start at ``1/n`` and only
ever decrease.
"""

from __future__ import annotations

import math

import numpy as np

from .core import PromiseViolation, as_points, squared_diameter
from .solution import EpochTrace, ReweighSolution, SolverConfig, TraceStep
from .weights import one_d_filter

RETURN_FACTOR = 300.0
EPOCH_SHRINK = 2.0 / 3.0
FILTER_TARGET = 0.25


def mmw_update(history, norm0: float, d: int | None = None) -> np.ndarray:
    """Density matrix ``exp(sum_k M_k / norm0) / tr exp(...)``.

    The exponential is taken through a symmetric eigendecomposition with the
    largest eigenvalue subtracted first, so large exponents do not overflow.
    An empty history gives ``I / d``, which needs ``d`` passed explicitly.
    """
    if not norm0 > 0:
        raise ValueError("norm0 must be positive")
    mats = [np.asarray(m, dtype=float) for m in history]
    if not mats:
        if d is None:
            raise ValueError("an empty history needs the dimension d")
        return np.eye(d) / d
    s = np.sum(mats, axis=0) / norm0
    s = (s + s.T) / 2
    vals, vecs = np.linalg.eigh(s)
    e = np.exp(vals - vals.max())
    u = (vecs * (e / e.sum())) @ vecs.T
    return (u + u.T) / 2


def weighted_moment(x: np.ndarray, w: np.ndarray):
    """``(mu(w), M(w))`` with ``mu`` normalised by ``sum(w)`` and ``M`` unnormalised."""
    total = w.sum()
    if not total > 0:
        raise PromiseViolation("promise violated: all weight removed")
    mu = (w @ x) / total
    xc = x - mu
    m = xc.T @ (w[:, None] * xc)
    return mu, (m + m.T) / 2, xc


def _top(m: np.ndarray) -> float:
    return float(max(np.linalg.eigvalsh(m)[-1], 0.0))


def epoch_budget(rho: float, lam: float, constant: float = 4.0) -> int:
    return math.ceil(constant * math.log2(max(rho / lam, 1.0))) + 1


def inner_budget(d: int, constant: float = 8.0) -> int:
    return math.ceil(constant * math.log2(d)) + 1


def mmw_reweigh(points, lam: float, eps: float, rho: float | None = None, delta: float = 0.1,
                rng=None, config=None) -> ReweighSolution:
    """Epoch-based matrix multiplicative weights reweighing.

    Args:
      points: (n, d) array.
      lam: promise level; the solver returns once ``||M|| <= 300 lam``.
      eps: corruption fraction, at most 0.1.
      rho: squared diameter (defaults to the computed value); sets the epoch
        budget ``ceil(4 log2(rho / lam)) + 1``.
      delta: unused by the dense eigensolver, kept for a uniform interface.
      rng: unused (the solver is deterministic), kept for a uniform interface.
      config: SolverConfig or mapping; ``epoch_constant`` and
        ``inner_constant`` scale the two budgets.

    Returns:
      ReweighSolution with weights ``w / ||w||_1``, center ``mu(w)`` and one
      EpochTrace per completed epoch.

    Raises:
      PromiseViolation: an epoch or inner budget ran out.
    """
    del delta, rng
    x = as_points(points)
    n, d = x.shape
    config = SolverConfig.from_mapping(config)
    if not 0 < eps <= 0.1:
        raise ValueError(f"the matrix multiplicative weights solver needs 0 < eps <= 0.1, got {eps}")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    rho = squared_diameter(x) if rho is None else rho
    w = np.full(n, 1.0 / n)
    sol = ReweighSolution(center=w @ x, weights=w, trace=[], iterations=0, solver="mmw")

    if lam == 0:
        mu, m, _ = weighted_moment(x, w)
        if _top(m) > 0:
            raise PromiseViolation("promise violated: lambda is 0 but the points are not identical")
        sol.trace.append(TraceStep(0.0, True))
        sol.spectral_norm = 0.0
        return sol

    max_epochs = epoch_budget(rho, lam, config.epoch_constant)
    max_inner = inner_budget(d, config.inner_constant)
    sol.planned_iterations = max_epochs * max_inner

    for s in range(max_epochs + 1):
        mu, m, xc = weighted_moment(x, w)
        lam0 = _top(m)
        sol.trace.append(TraceStep(lam0))
        if lam0 <= RETURN_FACTOR * lam:
            total = w.sum()
            sol.weights = w / total
            sol.center = mu
            sol.trace[-1].selected = True
            sol.spectral_norm = lam0 / total
            return sol
        if s == max_epochs:
            break
        history = []
        lam_t = lam0
        t = 0
        while True:
            if t > 0:
                mu, m, xc = weighted_moment(x, w)
                lam_t = _top(m)
                sol.trace.append(TraceStep(lam_t))
                if lam_t <= EPOCH_SHRINK * lam0:
                    break
                history.append(m)
            if t >= max_inner:
                raise PromiseViolation(
                    f"promise violated or constants too tight: epoch {s} did not shrink "
                    f"within {max_inner} inner iterations")
            if config.record_weights:
                sol.history.append(w.copy())
            u = mmw_update(history, lam0, d)
            tau = np.einsum("ij,ij->i", xc @ u, xc)
            tau = np.maximum(tau, 0.0)
            if w @ tau > FILTER_TARGET * lam0:
                w = one_d_filter(w, tau, FILTER_TARGET)
            t += 1
            sol.iterations += 1
        sol.epochs.append(EpochTrace(lam0, t, lam_t))
    raise PromiseViolation(
        f"promise violated or constants too tight: norm still above {RETURN_FACTOR:g} lambda "
        f"after {max_epochs} epochs")
