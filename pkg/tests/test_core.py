import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reweigh import DegenerateWeightsError, approx_top_eigenvector, spectral_norm, weighted_cov_apply, weighted_mean
from reweigh.core import as_points, power_steps, squared_diameter, weighted_second_moment

from .helpers import dense_norm


def test_as_points_shapes():
    assert as_points([1.0, 2.0, 3.0]).shape in {(3, 1), (1, 3)}
    with pytest.raises(ValueError):
        as_points(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        as_points([[1.0, np.nan]])


def test_weighted_mean_two_points():
    np.testing.assert_allclose(weighted_mean([[0.0, 0.0], [2.0, 4.0]], [0.25, 0.75]), [1.5, 3.0])


def test_weighted_mean_degenerate():
    with pytest.raises(DegenerateWeightsError):
        weighted_mean([[1.0], [2.0]], [0.0, 0.0])


def test_cov_apply_matches_dense(rng):
    x = rng.normal(size=(30, 4))
    w = rng.random(30)
    c = rng.normal(size=4)
    v = rng.normal(size=4)
    xc = x - c
    dense = (xc.T * w) @ xc
    np.testing.assert_allclose(weighted_cov_apply(x, w, c, v), dense @ v, rtol=1e-12)
    np.testing.assert_allclose(weighted_second_moment(x, w, c), dense, rtol=1e-12)


def test_power_steps_formula():
    # ln(10 * 100 / 0.01) / (1/8) = 8 ln(1e5)
    assert power_steps(7 / 8, 0.01, 100, 10) == math.ceil(8 * math.log(1e5))
    with pytest.raises(ValueError):
        power_steps(1.0, 0.1, 1, 1)
    with pytest.raises(ValueError):
        power_steps(0.5, 0.0, 1, 1)


def test_diagonal_second_moment():
    # points +-sqrt(3) e1, +-1 e2 with equal weights: M = diag(1.5, 0.5)
    x = np.array([[3 ** 0.5, 0], [-(3 ** 0.5), 0], [0, 1.0], [0, -1.0]])
    est = approx_top_eigenvector(x, np.full(4, 0.25), np.zeros(2), rng=0)
    assert abs(est.vector[0]) == pytest.approx(1.0, abs=1e-6)
    assert est.rayleigh == pytest.approx(1.5, rel=1e-9)


def test_zero_matrix_is_degenerate():
    x = np.ones((5, 3))
    est = approx_top_eigenvector(x, np.full(5, 0.2), np.ones(3), rng=0)
    assert est.degenerate and est.rayleigh == 0.0
    np.testing.assert_array_equal(est.vector, [1.0, 0.0, 0.0])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 40), st.integers(1, 12), st.sampled_from([0.5, 7 / 8, 0.99]))
def test_power_method_quality(seed, n, d, c):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, d)) * rng.exponential(size=d)
    w = rng.random(n)
    center = x.mean(axis=0)
    est = approx_top_eigenvector(x, w, center, c=c, alpha=1e-3, rng=seed)
    top = dense_norm(x, w, center)
    assert abs(np.linalg.norm(est.vector) - 1) < 1e-9
    assert est.rayleigh <= top * (1 + 1e-9) + 1e-12
    assert est.rayleigh >= c * top - 1e-12


def test_power_method_many_points_few_dims():
    # exercises the repeated-squaring branch (steps > d, n >= d)
    rng = np.random.default_rng(1)
    x = rng.normal(size=(2000, 3)) * [1.0, 1.0, 1.01]
    w = np.full(2000, 1 / 2000)
    est = approx_top_eigenvector(x, w, x.mean(0), c=0.99, alpha=1e-6, rng=0)
    assert est.rayleigh >= 0.99 * dense_norm(x, w, x.mean(0))


def test_power_method_wide_data():
    # d > n and few steps: the plain iteration branch
    rng = np.random.default_rng(2)
    x = rng.normal(size=(5, 400))
    w = np.full(5, 0.2)
    est = approx_top_eigenvector(x, w, np.zeros(400), c=0.5, alpha=0.5, rng=0)
    assert est.rayleigh >= 0.5 * dense_norm(x, w, np.zeros(400))


def test_spectral_norm_matches_dense(rng):
    x = rng.normal(size=(8, 3))
    w = rng.random(8)
    assert spectral_norm(x, w, np.zeros(3)) == pytest.approx(dense_norm(x, w, np.zeros(3)), rel=1e-10)


def test_spectral_norm_high_dim_branch(rng):
    x = rng.normal(size=(20, 501))
    w = np.full(20, 0.05)
    val = spectral_norm(x, w, np.zeros(501), rng=0)
    assert 0.99 * dense_norm(x, w, np.zeros(501)) <= val <= dense_norm(x, w, np.zeros(501)) * (1 + 1e-9)


def test_squared_diameter_exact(rng):
    x = rng.normal(size=(60, 3))
    brute = max(float(((a - b) ** 2).sum()) for a in x for b in x)
    assert squared_diameter(x) == pytest.approx(brute, rel=1e-10)


def test_squared_diameter_bound_for_large_n(rng):
    x = rng.normal(size=(300, 2))
    exact = squared_diameter(x)
    assert squared_diameter(x, exact_limit=10) >= exact
