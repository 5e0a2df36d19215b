"""Mean estimation pipelines built on the reweighing solvers."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .centers import best_weights_for_direction, spectral_objective
from .core import as_points, squared_diameter
from .filters import breakdown_filter, reweigh_with_prune, subgaussian_filter, mwu_reweigh
from .gd import gd_reweigh, gd_subgaussian
from .mmw import mmw_reweigh
from .prune import coordinate_median, mom_prune, prune_ball
from .solution import PromiseParams, ReweighSolution, SolverConfig

BOUNDED_SOLVERS = ("mwu", "gd", "mmw")
SUBGAUSSIAN_SOLVERS = ("subg", "subg-gd")
ALL_SOLVERS = BOUNDED_SOLVERS + SUBGAUSSIAN_SOLVERS + ("breakdown",)

# Default round budget for the sub-gaussian solvers. Their analysed count
# ceil(10 rho / eps) is tens of thousands of rounds at n = 20000, d = 20.
SUBGAUSSIAN_BUDGET = 500


@dataclass
class EstimationReport:
    estimate: np.ndarray
    solver_used: str
    iterations: int
    wall_time: float
    spectral_norm: float
    error_vs_truth: float | None = None
    trace: dict[str, Any] = field(default_factory=dict)
    solution: ReweighSolution | None = field(default=None, repr=False)

    def with_truth(self, true_mean) -> "EstimationReport":
        self.error_vs_truth = float(np.linalg.norm(self.estimate - np.asarray(true_mean, dtype=float)))
        return self


def _summary(sol: ReweighSolution) -> dict[str, Any]:
    r = sol.rayleighs
    return {
        "rounds_traced": int(r.size),
        "first_rayleigh": float(r[0]) if r.size else None,
        "min_rayleigh": float(r.min()) if r.size else None,
        "early_exit": bool(sol.early_exit),
        "epochs": len(sol.epochs),
        "warnings": list(sol.warnings),
    }


def _report(sol: ReweighSolution, scale: float, solver: str, start: float) -> EstimationReport:
    est = np.asarray(sol.center, dtype=float) * scale
    if not np.all(np.isfinite(est)):
        raise FloatingPointError("estimate is not finite")
    return EstimationReport(est, solver, int(sol.iterations), time.perf_counter() - start,
                            float(sol.spectral_norm) * scale ** 2, trace=_summary(sol), solution=sol)


def robust_mean(data, eps: float, sigma: float = 1.0, solver: str = "mwu", delta: float = 0.1,
                rng=None, lam: float = 2.0, config=None) -> EstimationReport:
    """Robust mean of an eps-corrupted sample whose inliers have covariance at most sigma^2 I.

    The data are divided by sigma, reweighed at promise level ``lam`` and the
    reweighed mean is scaled back.

    Args:
      data: (n, d) array.
      eps: corruption fraction; at most 0.1 for mwu/gd/mmw, below 1/2 for
        breakdown.
      sigma: covariance scale.
      solver: one of mwu, gd, mmw, breakdown, subg, subg-gd. The last two
        route to ``robust_mean_subgaussian``.
      delta: failure probability.
      rng: seed or Generator.
      lam: promise level after scaling.
      config: solver configuration record.
    """
    start = time.perf_counter()
    x = as_points(data)
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if solver in SUBGAUSSIAN_SOLVERS:
        rep = robust_mean_subgaussian(x / sigma, eps, delta, rng, solver=solver, config=config)
        rep.estimate = rep.estimate * sigma
        rep.spectral_norm *= sigma ** 2
        rep.wall_time = time.perf_counter() - start
        return rep
    if solver == "breakdown":
        if not 0 < eps < 0.5:
            raise ValueError(f"breakdown solver needs eps in (0, 1/2), got {eps}")
        sol = breakdown_filter(x / sigma, lam, eps, delta, rng, config)
    elif solver in BOUNDED_SOLVERS:
        if not 0 < eps <= 0.1:
            raise ValueError(f"solver {solver} needs eps in (0, 0.1], got {eps}")
        sol = reweigh_with_prune(x / sigma, lam, eps, delta, solver, rng, config)
    else:
        raise ValueError(f"unknown solver {solver!r}; choose from {', '.join(ALL_SOLVERS)}")
    return _report(sol, sigma, solver, start)


def subgaussian_prune_radius(n: int, d: int) -> float:
    return 2.0 * math.sqrt(d * math.log(max(n, 2)))


def robust_mean_subgaussian(data, eps: float, delta: float = 0.1, rng=None, solver: str = "subg",
                            config=None) -> EstimationReport:
    """Robust mean for sub-gaussian inliers with identity covariance.

    Prunes to radius ``2 sqrt(d ln n)`` and runs the sub-gaussian filter with
    width equal to the survivors' squared diameter. Unless ``config`` sets
    ``max_iter``, the filter is capped at ``SUBGAUSSIAN_BUDGET`` rounds and
    returns its best iterate.
    """
    start = time.perf_counter()
    x = as_points(data)
    n, d = x.shape
    if not 0 < eps < 0.5:
        raise ValueError(f"eps must lie in (0, 1/2), got {eps}")
    config = SolverConfig.from_mapping(config)
    if config.max_iter is None:
        config = SolverConfig(**{**config.__dict__, "max_iter": SUBGAUSSIAN_BUDGET})
    rng = np.random.default_rng(rng)
    pruned = prune_ball(x, subgaussian_prune_radius(n, d), eps, delta / 2, rng)
    kept = pruned.kept_indices
    sub = x[kept]
    rho = squared_diameter(sub)
    if solver == "subg":
        sol = subgaussian_filter(sub, eps, rho, delta / 2, rng, config)
    elif solver == "subg-gd":
        sol = gd_subgaussian(sub, eps, rho, delta / 2, rng, config)
    else:
        raise ValueError(f"unknown sub-gaussian solver {solver!r}")
    full = np.zeros(n)
    full[kept] = sol.weights
    sol.weights = full
    sol.kept = kept
    return _report(sol, 1.0, solver, start)


def median_of_means_1d(samples, delta: float | None = None, k: int | None = None) -> float:
    """Median of the means of ``k`` contiguous buckets.

    ``k`` defaults to ``ceil(8 ln(1/delta))``. Buckets differ in size by at
    most one, with the larger ones first; an even k averages the middle two.
    """
    s = np.asarray(samples, dtype=float).ravel()
    if s.size == 0:
        raise ValueError("no samples")
    if k is None:
        if delta is None or not 0 < delta < 1:
            raise ValueError("give k or a delta in (0, 1)")
        k = math.ceil(8 * math.log(1 / delta))
    k = min(max(int(k), 1), s.size)
    return float(np.median([b.mean() for b in np.array_split(s, k)]))


def bucket_means(data, count: int, rng=None) -> np.ndarray:
    """Means of ``count`` equal buckets of ``floor(n / count)`` points.

    With ``rng`` set the points are shuffled first; with ``None`` they keep
    their order. Leftover points are dropped.
    """
    x = as_points(data)
    n, d = x.shape
    if count < 1:
        raise ValueError("need at least one bucket")
    if count > n:
        raise ValueError(f"cannot form {count} buckets from {n} points")
    size = n // count
    if rng is not None:
        x = x[np.random.default_rng(rng).permutation(n)]
    return x[: size * count].reshape(count, size, d).mean(axis=1)


@dataclass(frozen=True)
class HeavyTailConfig:
    delta: float = 0.01
    bucket_factor: float = 8.0
    prune_fraction: float = 0.01
    solver: str = "mwu"
    cross_fit: bool = True
    lam: float | None = None

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.bucket_factor > 0:
            raise ValueError("bucket_factor must be positive")
        if not 0 <= self.prune_fraction < 0.5:
            raise ValueError("prune_fraction must lie in [0, 1/2)")
        if self.solver not in BOUNDED_SOLVERS:
            raise ValueError(f"heavy-tailed solver must be one of {BOUNDED_SOLVERS}")

    @property
    def k(self) -> int:
        return bucket_count(self.delta, self.bucket_factor)


def bucket_count(delta: float, bucket_factor: float) -> int:
    return math.ceil(round(bucket_factor * math.log(1 / delta), 9))


def subgaussian_rate(n: int, trace: float, top: float, delta: float) -> float:
    """``sqrt(tr Sigma / n) + sqrt(||Sigma|| ln(1/delta) / n)``."""
    return math.sqrt(trace / n) + math.sqrt(top * math.log(1 / delta) / n)


def estimate_level(points, eps: float = 0.1) -> float:
    """Twice the trimmed spectral objective at the coordinate-wise median.

    Scores along the top eigenvector of the second moment about the median,
    keeps the best ``(1 - eps)`` fraction and measures the spectral norm
    there.
    """
    z = as_points(points)
    mu0 = coordinate_median(z)
    zc = z - mu0
    m = zc.T @ zc / z.shape[0]
    v = np.linalg.eigh((m + m.T) / 2)[1][:, -1]
    w = best_weights_for_direction(z, mu0, eps, v)
    return 2.0 * spectral_objective(z, mu0, w)


def heavy_tailed_mean(data, config: HeavyTailConfig | None = None, rng=None) -> EstimationReport:
    """Mean estimate with the sub-gaussian rate under a finite covariance.

    Splits a seeded shuffle of the data into ``2k`` bucket means with
    ``k = ceil(bucket_factor ln(1/delta))``. Each half is pruned of its
    ``ceil(prune_fraction k)`` means farthest from the other half's
    coordinate-wise median; with ``cross_fit`` off only the first half is
    kept. The survivors are reweighed with eps = 0.1 at level ``config.lam``
    or the estimate from ``estimate_level``.
    """
    start = time.perf_counter()
    config = config or HeavyTailConfig()
    x = as_points(data)
    n = x.shape[0]
    k = config.k
    if 2 * k > n:
        raise ValueError(f"need 2k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(rng)
    z = bucket_means(x, 2 * k, rng)
    first, second = z[:k], z[k:]
    keep = [first[mom_prune(first, second, config.prune_fraction)]]
    if config.cross_fit:
        keep.append(second[mom_prune(second, first, config.prune_fraction)])
    s = np.vstack(keep)
    lam = estimate_level(s) if config.lam is None else config.lam
    params = PromiseParams(lam=lam, eps=0.1, rho=squared_diameter(s), delta=config.delta / 3)
    if config.solver == "mwu":
        sol = mwu_reweigh(s, params, rng)
    elif config.solver == "gd":
        sol = gd_reweigh(s, params, rng)
    else:
        sol = mmw_reweigh(s, lam, 0.1, params.rho, params.delta, rng)
    rep = _report(sol, 1.0, config.solver, start)
    rep.trace.update({"k": k, "buckets_kept": int(s.shape[0]), "lambda": float(lam)})
    return rep
