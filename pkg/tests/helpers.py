"""Independent oracles shared by the test modules."""

import itertools
import math

import numpy as np


def dense_norm(points, w, center):
    xc = np.asarray(points, dtype=float) - np.asarray(center, dtype=float)
    m = xc.T @ (np.asarray(w, dtype=float)[:, None] * xc)
    return float(np.linalg.eigvalsh((m + m.T) / 2)[-1])


def kl_oracle(w, eps):
    """Enumerate every capped set C: p = cap on C, beta * w elsewhere; keep the best feasible one."""
    w = np.asarray(w, dtype=float)
    w = w / w.sum()
    n = len(w)
    c = 1.0 / ((1.0 - eps) * n)
    best, best_val = None, math.inf
    for mask in itertools.product([False, True], repeat=n):
        capped = np.array(mask)
        rest = w[~capped].sum()
        if rest <= 0:
            continue
        beta = (1.0 - capped.sum() * c) / rest
        if beta <= 0:
            continue
        p = np.where(capped, c, beta * w)
        if np.any(p > c * (1 + 1e-12)) or abs(p.sum() - 1) > 1e-9:
            continue
        pos = p > 0
        if np.any(w[pos] <= 0):
            continue
        val = float(np.sum(p[pos] * np.log(p[pos] / w[pos])))
        if val < best_val:
            best, best_val = p, val
    return best


def l2_oracle(w, eps):
    """Enumerate all 3^n active sets (zero, capped, free) of the Euclidean projection."""
    w = np.asarray(w, dtype=float)
    n = len(w)
    c = 1.0 / ((1.0 - eps) * n)
    best, best_val = None, math.inf
    for states in itertools.product((0, 1, 2), repeat=n):
        s = np.array(states)
        free = s == 2
        p = np.where(s == 1, c, 0.0)
        if free.any():
            theta = (w[free].sum() + (s == 1).sum() * c - 1.0) / free.sum()
            p[free] = w[free] - theta
        if np.any(p < -1e-12) or np.any(p > c + 1e-12) or abs(p.sum() - 1) > 1e-9:
            continue
        val = float(np.sum((p - w) ** 2))
        if val < best_val:
            best, best_val = p, val
    return best


def capped_vertices(k, eps):
    """All vertices of W_{k,eps}: floor((1-eps)k) entries at the cap plus one remainder entry."""
    c = 1.0 / ((1.0 - eps) * k)
    m = min(k, math.floor(round((1.0 - eps) * k, 9)))
    rest = 1.0 - m * c
    out = []
    for top in itertools.combinations(range(k), m):
        base = np.zeros(k)
        base[list(top)] = c
        if rest <= 1e-15:
            out.append(base)
            continue
        for j in range(k):
            if j in top:
                continue
            v = base.copy()
            v[j] = rest
            out.append(v)
    return np.array(out)


def vertex_min_objective(points, center, eps):
    """min over the vertices of W_{k,eps} of the top eigenvalue of the weighted second moment (d = 2)."""
    x = np.asarray(points, dtype=float) - np.asarray(center, dtype=float)
    V = capped_vertices(x.shape[0], eps)
    a = V @ (x[:, 0] ** 2)
    b = V @ (x[:, 0] * x[:, 1])
    cc = V @ (x[:, 1] ** 2)
    top = (a + cc) / 2 + np.sqrt(((a - cc) / 2) ** 2 + b ** 2)
    return float(top.min())


def grid_max_count(points, center, threshold, m=3600):
    x = np.asarray(points, dtype=float) - np.asarray(center, dtype=float)
    theta = np.pi * np.arange(m) / m
    v = np.column_stack([np.cos(theta), np.sin(theta)])
    return int((np.abs(x @ v.T) >= threshold).sum(axis=0).max())


def random_capped_weights(rng, n, eps):
    """A random member of W_{n,eps}: a random convex mix of two random vertices and uniform."""
    c = 1.0 / ((1.0 - eps) * n)
    m = math.floor(round((1.0 - eps) * n, 9))
    out = np.zeros(n)
    coeffs = rng.dirichlet(np.ones(3))
    for a in coeffs[:2]:
        idx = rng.permutation(n)
        v = np.zeros(n)
        v[idx[:m]] = c
        v[idx[m]] = 1.0 - m * c if m < n else 0.0
        out += a * v
    out += coeffs[2] / n
    return out
