"""Seeded synthetic instances with ground-truth labels.

Every generator is a pure function of its arguments and seed. Corruption is
oblivious: the adversaries below are parameterised, not data-inspecting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np


@dataclass
class Witness:
    center: np.ndarray
    weights: np.ndarray
    lam: float


@dataclass
class Instance:
    points: np.ndarray
    true_mean: np.ndarray
    inlier_labels: np.ndarray
    witness: Witness | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def _mean_vector(mean, d: int) -> np.ndarray:
    if mean is None:
        return np.zeros(d)
    m = np.asarray(mean, dtype=float)
    if m.ndim == 0:
        return np.full(d, float(m))
    if m.shape != (d,):
        raise ValueError(f"mean has shape {m.shape}, expected ({d},)")
    return m


def _check_size(n: int, d: int) -> None:
    if n < 1 or d < 1:
        raise ValueError(f"need n, d >= 1, got n={n}, d={d}")


def gen_gaussian(n: int, d: int, mean=None, seed: int = 0) -> Instance:
    """i.i.d. N(mean, I) samples, all labelled inliers."""
    _check_size(n, d)
    mu = _mean_vector(mean, d)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, d)) + mu
    return Instance(x, mu, np.ones(n, dtype=bool),
                    meta={"generator": "gaussian", "n": n, "d": d, "seed": seed})


def gen_student_t(n: int, d: int, dof: float, seed: int = 0, mean=None) -> Instance:
    """Multivariate Student-t with ``dof > 2``, scaled to identity covariance.

    A t vector is ``z / sqrt(u / dof)`` with ``z ~ N(0, I)`` and
    ``u ~ chi2(dof)``; its covariance is ``dof / (dof - 2) I``, which the
    factor ``sqrt((dof - 2) / dof)`` undoes.
    """
    _check_size(n, d)
    if not dof > 2:
        raise ValueError(f"dof must exceed 2 for a finite covariance, got {dof}")
    mu = _mean_vector(mean, d)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, d))
    u = rng.chisquare(dof, size=n)
    x = z / np.sqrt(u / dof)[:, None] * math.sqrt((dof - 2) / dof) + mu
    return Instance(x, mu, np.ones(n, dtype=bool),
                    meta={"generator": "student_t", "n": n, "d": d, "dof": dof, "seed": seed})


def _direction(d: int, rng, random_direction: bool) -> np.ndarray:
    if random_direction:
        v = rng.standard_normal(d)
        return v / np.linalg.norm(v)
    e = np.zeros(d)
    e[0] = 1.0
    return e


def corrupt(instance: Instance, eps: float, adversary: str = "cluster", shift: float = 10.0,
            radius: float = 1.0, seed: int = 0, random_direction: bool = False) -> Instance:
    """Replace exactly ``floor(eps n)`` randomly chosen points.

    Adversaries, with target ``t = true_mean + shift * e``:

    * ``cluster``: every replaced point sits at ``t``.
    * ``scatter``: replaced points are uniform in the ball of ``radius`` around ``t``.
    * ``mirror``: replaced points are the originals reflected through the
      hyperplane through ``t`` orthogonal to ``e``.

    ``e`` is e_1 unless ``random_direction`` is set.
    """
    if not 0 <= eps < 0.5:
        raise ValueError(f"eps must lie in [0, 1/2), got {eps}")
    x = instance.points.copy()
    n, d = x.shape
    m = math.floor(round(eps * n, 9))
    labels = instance.inlier_labels.copy()
    meta = dict(instance.meta)
    meta["corruption"] = {"eps": eps, "adversary": adversary, "shift": shift,
                          "radius": radius, "seed": seed, "random_direction": random_direction}
    if m == 0:
        return replace(instance, points=x, inlier_labels=labels, meta=meta)
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(n, size=m, replace=False))
    e = _direction(d, rng, random_direction)
    target = instance.true_mean + shift * e
    if adversary == "cluster":
        x[idx] = target
    elif adversary == "scatter":
        g = rng.standard_normal((m, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = radius * rng.random(m) ** (1.0 / d)
        x[idx] = target + g * r[:, None]
    elif adversary == "mirror":
        off = (x[idx] - target) @ e
        x[idx] = x[idx] - 2.0 * off[:, None] * e
    else:
        raise ValueError(f"unknown adversary {adversary!r}")
    labels[idx] = False
    return replace(instance, points=x, inlier_labels=labels, meta=meta)


def gen_planted_promise(n: int, d: int, lam: float, eps: float, seed: int = 0,
                        outlier_scale: float = 1.5, fill: float = 0.9) -> Instance:
    """Instance with a verified witness for the centrality promise at level ``lam``.

    ``n - floor(eps n)`` Gaussian inliers are rescaled so that, with uniform
    weights on them, the second moment about their mean has top eigenvalue
    ``fill * lam``. The remaining points form a jittered cluster at distance
    ``outlier_scale * sqrt(d lam / eps)`` along e_1. The uniform-on-inliers
    weights lie in W_{n,eps}, and the witness is re-verified with a dense
    eigensolver.

    Raises:
      RuntimeError: verification failed after 10 rescales.
    """
    _check_size(n, d)
    if not 0 < eps < 0.5:
        raise ValueError(f"eps must lie in (0, 1/2), got {eps}")
    if not lam > 0:
        raise ValueError("lam must be positive")
    rng = np.random.default_rng(seed)
    bad = math.floor(round(eps * n, 9))
    good = n - bad
    if good < 1:
        raise ValueError("no inliers left")
    g = rng.standard_normal((good, d))
    target = fill * lam
    w_good = np.full(good, 1.0 / good)
    for _ in range(10):
        nu = g.mean(axis=0)
        gc = g - nu
        top = float(np.linalg.eigvalsh(gc.T @ gc / good)[-1])
        if top <= 0:
            raise RuntimeError("degenerate inlier cloud")
        g = nu + gc * math.sqrt(target / top)
        nu = g.mean(axis=0)
        gc = g - nu
        top = float(np.linalg.eigvalsh(gc.T @ (w_good[:, None] * gc))[-1])
        if top <= lam * (1 + 1e-9):
            break
    else:
        raise RuntimeError("could not verify the planted promise")
    e = np.zeros(d)
    e[0] = 1.0
    dist = outlier_scale * math.sqrt(d * lam / eps)
    jitter = rng.standard_normal((bad, d)) * math.sqrt(lam) * 0.1
    out = nu + dist * e + jitter
    x = np.vstack([g, out])
    perm = rng.permutation(n)
    x = x[perm]
    labels = np.concatenate([np.ones(good, dtype=bool), np.zeros(bad, dtype=bool)])[perm]
    w = np.where(labels, 1.0 / good, 0.0)
    return Instance(x, nu, labels, Witness(nu, w, lam),
                    meta={"generator": "planted", "n": n, "d": d, "lam": lam, "eps": eps,
                          "seed": seed, "outlier_scale": outlier_scale})
