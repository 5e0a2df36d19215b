"""Multiplicative-weights filters for spectral sample reweighing.

Three variants live here:

* ``mwu_reweigh``: soft down-weighting by ``1 - eta tau_i / rho`` with
  ``eta = 1/2`` followed by a KL projection onto the capped simplex.
* ``subgaussian_filter``: the same update with ``eta = eps``, a sharper
  eigenvector and an early return once the top eigenvalue drops to 1.
* ``breakdown_filter``: scores measured from the median projection, with no
  projection step, which tolerates any corruption fraction below 1/2.
"""

from __future__ import annotations

import math

import numpy as np

from .core import (
    PromiseViolation,
    as_points,
    spectral_norm,
    squared_diameter,
    top_eigenvector_centered,
)
from .prune import prune_ball
from .solution import PromiseParams, ReweighSolution, SolverConfig, TraceStep, WidthViolation
from .weights import kl_project

WIDTH_SLACK = 1e-9


def _all_identical(x: np.ndarray) -> bool:
    return bool(np.all(x == x[0]))


def _check_width(tau: np.ndarray, rho: float, t: int) -> None:
    worst = float(tau.max())
    if worst > rho * (1 + WIDTH_SLACK) + 1e-300:
        raise WidthViolation(t, worst, rho)


def _finish(x, sol: ReweighSolution, best: int) -> ReweighSolution:
    for i, step in enumerate(sol.trace):
        step.selected = i == best
    sol.spectral_norm = spectral_norm(x, sol.weights, sol.center)
    return sol


def _uniform_solution(x: np.ndarray, solver: str) -> ReweighSolution:
    n = x.shape[0]
    w = np.full(n, 1.0 / n)
    sol = ReweighSolution(center=w @ x, weights=w, trace=[TraceStep(0.0, True)],
                          iterations=0, solver=solver, tau_sum=np.zeros(n))
    sol.spectral_norm = spectral_norm(x, w, sol.center)
    return sol


def reweigh_loop(x, rho, T, c, alpha, stop_level, rng, config, solver, update,
                 return_current_on_stop=False) -> ReweighSolution:
    """Shared driver: eigenvector, scores, width check, ``w <- update(w, tau, t)``.

    Returns the iterate with the smallest traced Rayleigh quotient, or the
    current one when ``return_current_on_stop`` is set and the quotient drops
    to ``stop_level``.
    """
    n = x.shape[0]
    w = np.full(n, 1.0 / n)
    sol = ReweighSolution(center=w @ x, weights=w.copy(), trace=[], iterations=0,
                          solver=solver, planned_iterations=T, tau_sum=np.zeros(n))
    scale = float(np.max(np.einsum("ij,ij->i", x, x)))
    best = (math.inf, -1, None, None)
    for t in range(1, T + 1):
        nu = w @ x
        xc = x - nu
        est = top_eigenvector_centered(xc, w, c, alpha, rng, scale)
        sol.trace.append(TraceStep(est.rayleigh))
        sol.iterations = t
        if config.record_weights:
            sol.history.append(w.copy())
        if est.rayleigh < best[0]:
            best = (est.rayleigh, t - 1, w.copy(), nu)
        if config.early_exit and est.rayleigh <= stop_level:
            sol.early_exit = True
            if return_current_on_stop:
                best = (est.rayleigh, t - 1, w.copy(), nu)
            break
        tau = (xc @ est.vector) ** 2
        _check_width(tau, rho, t)
        sol.tau_sum += tau
        sol.played_loss += float(w @ tau)
        w = update(w, tau, t)
    _, idx, sol.weights, sol.center = best
    return _finish(x, sol, idx)


def mwu_reweigh(points, params: PromiseParams, rng=None, config=None) -> ReweighSolution:
    """Multiplicative weights for spectral sample reweighing.

    Runs ``T = ceil(10 rho eps / lambda)`` rounds with step 1/2 and a
    7/8-approximate top eigenvector per round, returning the iterate whose
    traced Rayleigh quotient is smallest. Rounds stop early once the quotient
    certifies ``||M|| <= 60 lambda``. ``params.rho`` defaults to the squared
    diameter of the points.

    Raises:
      WidthViolation: a score exceeded ``rho``.
    """
    x = as_points(points)
    config = SolverConfig.from_mapping(config)
    if params.lam == 0 or _all_identical(x):
        return _uniform_solution(x, "mwu")
    rho = squared_diameter(x) if params.rho is None else params.rho
    if rho == 0:
        return _uniform_solution(x, "mwu")
    T = max(1, math.ceil(10 * rho * params.eps / params.lam))
    if config.max_iter is not None:
        T = min(T, config.max_iter)
    c = 7 / 8 if config.c is None else config.c
    eta = 0.5 if config.step_size is None else config.step_size
    eps = params.eps
    return reweigh_loop(x, rho, T, c, params.delta / (2 * T), 60 * params.lam * c,
                        np.random.default_rng(rng), config, "mwu",
                        lambda w, tau, t: kl_project(w * (1.0 - eta * tau / rho), eps))


def subgaussian_filter(points, eps: float, rho: float | None = None, delta: float = 0.1,
                       rng=None, config=None) -> ReweighSolution:
    """Multiplicative weights tuned for sub-gaussian inliers with unit covariance.

    Step size ``eps``, a ``(1 - eps^2)``-approximate eigenvector, and an
    immediate return once the Rayleigh quotient is at most 1. Otherwise runs
    ``ceil(t_constant * rho / eps)`` rounds (capped by ``config.max_iter``)
    and returns the iterate with the smallest quotient.
    """
    x = as_points(points)
    config = SolverConfig.from_mapping(config)
    if not 0 < eps < 0.5:
        raise ValueError(f"eps must lie in (0, 1/2), got {eps}")
    if _all_identical(x):
        return _uniform_solution(x, "subg")
    rho = squared_diameter(x) if rho is None else rho
    T = max(1, math.ceil(config.t_constant * rho / eps))
    if config.max_iter is not None:
        T = min(T, config.max_iter)
    c = 1 - eps ** 2 if config.c is None else config.c
    eta = eps if config.step_size is None else config.step_size
    return reweigh_loop(x, rho, T, c, delta / T, 1.0, np.random.default_rng(rng), config, "subg",
                        lambda w, tau, t: kl_project(w * (1.0 - eta * tau / rho), eps),
                        return_current_on_stop=True)


def breakdown_threshold(lam: float, eps: float) -> float:
    return 16 / 7 * lam * (1 + 1 / (0.5 - eps))


def breakdown_filter(points, lam: float, eps: float, delta: float = 0.1, rng=None,
                     config=None) -> ReweighSolution:
    """Median-centred filter that works for any corruption fraction below 1/2.

    Weights start at 1/n and are never renormalised. Each round projects on a
    7/8-approximate top eigenvector of ``M(w)``, scores every point by its
    squared distance to the median projection and multiplies ``w_i`` by
    ``1 - tau_i / tau_max``. The loop ends once ``rayleigh / c`` falls below
    ``(16/7) lambda (1 + 1/(1/2 - eps))``.

    Raises:
      PromiseViolation: more than ``ceil(2 eps n) + d`` rounds were needed.
    """
    x = as_points(points)
    n, d = x.shape
    config = SolverConfig.from_mapping(config)
    if not 0 < eps < 0.5:
        raise ValueError(f"eps must lie in (0, 1/2), got {eps}")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    c = 7 / 8 if config.c is None else config.c
    cap_iter = math.ceil(2 * eps * n) + d
    if config.max_iter is not None:
        cap_iter = min(cap_iter, config.max_iter)
    threshold = breakdown_threshold(lam, eps)
    rng = np.random.default_rng(rng)
    alpha = delta / cap_iter

    scale = float(np.max(np.einsum("ij,ij->i", x, x)))
    w = np.full(n, 1.0 / n)
    sol = ReweighSolution(center=w @ x, weights=w, trace=[], iterations=0,
                          solver="breakdown", planned_iterations=cap_iter)
    while True:
        total = w.sum()
        if not total > 0:
            raise PromiseViolation("promise violated: all weight removed")
        nu = (w @ x) / total
        if config.record_weights:
            sol.history.append(w.copy())
        est = top_eigenvector_centered(x - nu, w, c, alpha, rng, scale)
        sol.trace.append(TraceStep(est.rayleigh))
        if est.rayleigh / c < threshold:
            break
        if sol.iterations >= cap_iter:
            raise PromiseViolation(
                f"promise violated: filter still above {threshold:.6g} after {cap_iter} rounds")
        proj = x @ est.vector
        m = float(np.median(proj))
        tau = (proj - m) ** 2
        tau_max = float(tau[w > 0].max())
        if tau_max == 0:
            raise PromiseViolation("promise violated: scores vanished on the support")
        w = w * np.clip(1.0 - tau / tau_max, 0.0, 1.0)
        sol.iterations += 1
    sol.weights = w
    sol.center = nu
    return _finish(x, sol, len(sol.trace) - 1)


def reweigh_with_prune(points, lam: float, eps: float, delta: float = 0.1, solver: str = "mwu",
                       rng=None, config=None) -> ReweighSolution:
    """Prune to a ball, reweigh the survivors, and zero-extend the weights.

    The centrality promise puts ``(1 - 2 eps) n`` points in a ball of radius
    ``r = sqrt(d lambda / eps)``, so pruning uses that radius and fraction
    ``2 eps``; survivors then have squared diameter at most
    ``16 d lambda / eps``, which is passed on as the width.
    """
    from .gd import gd_reweigh
    from .mmw import mmw_reweigh

    x = as_points(points)
    n, d = x.shape
    rng = np.random.default_rng(rng)
    if lam == 0 or _all_identical(x):
        sol = _uniform_solution(x, solver)
        sol.kept = np.arange(n)
        return sol
    r = math.sqrt(d * lam / eps)
    pruned = prune_ball(x, r, min(2 * eps, 0.999), delta / 2, rng)
    kept = pruned.kept_indices
    inner = PromiseParams(lam=lam, eps=eps, rho=16 * d * lam / eps, delta=delta / 2)
    sub = x[kept]
    if solver == "mwu":
        sol = mwu_reweigh(sub, inner, rng, config)
    elif solver == "gd":
        sol = gd_reweigh(sub, inner, rng, config)
    elif solver == "mmw":
        sol = mmw_reweigh(sub, lam, eps, inner.rho, inner.delta, rng, config)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    full = np.zeros(n)
    full[kept] = sol.weights
    sol.weights = full
    if sol.tau_sum is not None:
        tau_full = np.zeros(n)
        tau_full[kept] = sol.tau_sum
        sol.tau_sum = tau_full
    sol.kept = kept
    return sol
