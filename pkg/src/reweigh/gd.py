"""Projected online gradient descent for spectral sample reweighing.

The per-round cost ``f_t(w) = <w, tau^(t)>`` is linear, so its gradient is the
score vector itself. Steps ``eta_t = R / (L sqrt(t))`` with ``L = sqrt(n) rho``
and ``R = sqrt(2)`` give regret at most ``1.5 L R sqrt(T)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import as_points, squared_diameter
from .filters import _all_identical, _uniform_solution, reweigh_loop
from .solution import PromiseParams, ReweighSolution, SolverConfig
from .weights import l2_project

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class GdConfig:
    L: float
    R: float
    T: int
    mode: str = "bounded-covariance"

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("T must be at least 1")
        if not self.L > 0:
            raise ValueError("L must be positive")

    def step(self, t: int) -> float:
        return self.R / (self.L * math.sqrt(t))

    def regret_bound(self, rounds: int | None = None) -> float:
        return 1.5 * self.L * self.R * math.sqrt(self.T if rounds is None else rounds)


def gd_iterations(n: int, rho: float, level: float) -> int:
    # T = 3 L^2 R^2 / level^2 = 6 n rho^2 / level^2
    return max(1, math.ceil(6 * n * rho ** 2 / level ** 2))


def cdgs_gradient(points, w, v) -> np.ndarray:
    """Gradient ``Xu * Xu - 2 (w^T Xu) Xu`` of the uncentred quadratic form.

    It differs from the centred scores ``<v, x_i - mu(w)>^2`` by the constant
    ``(w^T X v)^2`` on every coordinate, so projected steps on the simplex are
    identical for both.
    """
    x = as_points(points)
    xu = x @ np.asarray(v, dtype=float)
    return xu * xu - 2.0 * (np.asarray(w, dtype=float) @ xu) * xu


def _run_gd(x, eps, rho, T, c, alpha, stop_level, rng, config, solver, return_current):
    n = x.shape[0]
    gd = GdConfig(L=math.sqrt(n) * rho, R=SQRT2, T=T,
                  mode="sub-gaussian" if solver == "subg-gd" else "bounded-covariance")
    if config.step_size is not None:
        def step(t):
            return config.step_size / math.sqrt(t)
    else:
        step = gd.step
    sol = reweigh_loop(x, rho, T, c, alpha, stop_level, rng, config, solver,
                       lambda w, tau, t: l2_project(w - step(t) * tau, eps),
                       return_current_on_stop=return_current)
    if sol.iterations == T and not sol.early_exit and T < gd_iterations(n, rho, stop_level / c):
        sol.warnings.append(f"iteration budget {T} reached before the analysed count")
    return sol


def gd_reweigh(points, params: PromiseParams, rng=None, config=None) -> ReweighSolution:
    """Projected gradient descent counterpart of ``mwu_reweigh``.

    ``T = ceil(6 n rho^2 / lambda^2)`` capped at ``config.gd_budget`` (and
    ``config.max_iter``); stops early once the traced quotient certifies
    ``||M|| <= 24 lambda``. Hitting the budget leaves a warning on the result
    rather than raising.
    """
    x = as_points(points)
    config = SolverConfig.from_mapping(config)
    if params.lam == 0 or _all_identical(x):
        return _uniform_solution(x, "gd")
    rho = squared_diameter(x) if params.rho is None else params.rho
    if rho == 0:
        return _uniform_solution(x, "gd")
    n = x.shape[0]
    T = min(gd_iterations(n, rho, params.lam), config.gd_budget)
    if config.max_iter is not None:
        T = min(T, config.max_iter)
    c = 7 / 8 if config.c is None else config.c
    return _run_gd(x, params.eps, rho, T, c, params.delta / (2 * T), 24 * params.lam * c,
                   np.random.default_rng(rng), config, "gd", return_current=False)


def gd_subgaussian(points, eps: float, rho: float | None = None, delta: float = 0.1,
                   rng=None, config=None) -> ReweighSolution:
    """Gradient descent variant for sub-gaussian inliers with unit covariance.

    Early return once the ``(1 - eps^2)``-approximate quotient is at most 1;
    otherwise ``T = ceil(6 n rho^2 / eps^2)`` capped by the budget.
    """
    x = as_points(points)
    config = SolverConfig.from_mapping(config)
    if not 0 < eps < 0.5:
        raise ValueError(f"eps must lie in (0, 1/2), got {eps}")
    if _all_identical(x):
        return _uniform_solution(x, "subg-gd")
    rho = squared_diameter(x) if rho is None else rho
    n = x.shape[0]
    T = min(gd_iterations(n, rho, eps), config.gd_budget)
    if config.max_iter is not None:
        T = min(T, config.max_iter)
    c = 1 - eps ** 2 if config.c is None else config.c
    return _run_gd(x, eps, rho, T, c, delta / T, 1.0, np.random.default_rng(rng), config,
                   "subg-gd", return_current=True)
