import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lblepski.bandwidths import BandwidthGrid
from lblepski.kernel_estimator import (CUTOFF_RADIUS, EstimatorFamily, gaussian_kernel,
                                       graph_laplacian_apply, graph_laplacian_family, set_threads)
from lblepski.manifold_lab import (PointCloud, TEST_FUNCTION, eval_test_function, sample_uniform_sphere,
                                   sample_validation_sphere, target_operator)


def brute_force(est, f_est, qry, f_qry, h, d):
    out = []
    for y, fy in zip(qry, f_qry):
        terms = [(4 * math.pi) ** (-d / 2) * math.exp(-float(np.sum((y - x) ** 2)) / (4 * h * h)) * (fx - fy)
                 for x, fx in zip(est, f_est)]
        out.append(math.fsum(terms) / (len(est) * h ** (d + 2)))
    return np.array(out)


def test_kernel_at_zero():
    assert gaussian_kernel(np.zeros(3), 2) == pytest.approx(1 / (4 * math.pi), rel=1e-15)
    assert 1 / (4 * math.pi) == pytest.approx(0.0795775, abs=1e-7)


def test_kernel_at_norm_two():
    y = np.array([0.0, 2.0, 0.0])
    assert gaussian_kernel(y, 2) == pytest.approx(math.exp(-1) / (4 * math.pi), rel=1e-15)
    assert math.exp(-1) / (4 * math.pi) == pytest.approx(0.02927492, abs=1e-8)


def test_kernel_uses_intrinsic_dim_for_normalization():
    y = np.array([0.3, -0.1, 0.2])
    assert gaussian_kernel(y, 1) / gaussian_kernel(y, 2) == pytest.approx(math.sqrt(4 * math.pi))


def test_kernel_symmetry(rng):
    y = rng.normal(size=(20, 3))
    assert np.array_equal(gaussian_kernel(y, 2), gaussian_kernel(-y, 2))


def test_constant_function_is_exactly_zero(small_bench):
    est, val = small_bench
    fam = graph_laplacian_family(est, val, BandwidthGrid.logspace(0.02, 0.8, 6),
                                 f_values=np.full(est.n, 1.7), query_values=np.full(val.n, 1.7))
    assert np.all(fam.values == 0.0)


def test_one_term_formula():
    h = 0.3
    est = PointCloud(np.array([[0.0, 0.0, 0.0]]), 2, np.array([1.0]))
    qry = PointCloud(np.array([[0.0, h, 0.0]]), 2, np.array([0.0]))
    got = graph_laplacian_apply(est, None, qry, h)[0]
    assert got == pytest.approx(h ** -4 / (4 * math.pi) * math.exp(-0.25), rel=1e-14)


def test_matches_brute_force(rng):
    est = sample_uniform_sphere(60, 2)
    qry = sample_uniform_sphere(7, 3)
    f_est, f_qry = eval_test_function(est), eval_test_function(qry)
    for h in (0.05, 0.3, 1.5):
        got = graph_laplacian_apply(est, f_est, qry, h, query_values=f_qry)
        assert np.allclose(got, brute_force(est.points, f_est, qry.points, f_qry, h, 2), rtol=1e-12, atol=0)


def test_family_rows_match_single_bandwidth(small_bench):
    est, val = small_bench
    grid = BandwidthGrid([0.05, 0.2, 0.6])
    fam = graph_laplacian_family(est, val, grid)
    for k, h in enumerate(grid):
        assert np.array_equal(fam.values[k], graph_laplacian_apply(est, None, val, h))
    assert fam.n1 == est.n and fam.n2 == val.n


def test_errors():
    est = PointCloud(np.zeros((0, 3)), 2)
    q = PointCloud(np.ones((2, 3)), 2, np.ones(2))
    with pytest.raises(ValueError):
        graph_laplacian_apply(est, np.zeros(0), q, 0.1)
    est = PointCloud(np.ones((3, 3)), 2)
    with pytest.raises(ValueError):
        graph_laplacian_apply(est, np.zeros(2), q, 0.1)
    with pytest.raises(ValueError):
        graph_laplacian_apply(est, np.zeros(3), PointCloud(np.ones((2, 3)), 2), 0.1)
    with pytest.raises(ValueError):
        graph_laplacian_apply(est, np.zeros(3), q, -1.0)


def test_query_values_from_function():
    est = sample_uniform_sphere(200, 1)
    qry = sample_uniform_sphere(5, 2)
    a = graph_laplacian_apply(est, eval_test_function(est), qry, 0.3, function=TEST_FUNCTION)
    b = graph_laplacian_apply(est, eval_test_function(est), qry, 0.3, query_values=eval_test_function(qry))
    assert np.array_equal(a, b)


@settings(max_examples=25, deadline=None)
@given(alpha=st.floats(-10, 10), beta=st.floats(-10, 10), seed=st.integers(0, 10_000))
def test_linearity(alpha, beta, seed):
    est = sample_uniform_sphere(300, seed)
    qry = sample_uniform_sphere(10, seed + 1)
    f, g = eval_test_function(est), est.points[:, 2] ** 2
    fq, gq = eval_test_function(qry), qry.points[:, 2] ** 2
    lhs = graph_laplacian_apply(est, alpha * f + beta * g, qry, 0.25, query_values=alpha * fq + beta * gq)
    rhs = (alpha * graph_laplacian_apply(est, f, qry, 0.25, query_values=fq)
           + beta * graph_laplacian_apply(est, g, qry, 0.25, query_values=gq))
    scale = np.max(np.abs(alpha * graph_laplacian_apply(est, f, qry, 0.25, query_values=fq))) \
        + np.max(np.abs(beta * graph_laplacian_apply(est, g, qry, 0.25, query_values=gq))) + 1e-300
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * scale


@settings(max_examples=25, deadline=None)
@given(c=st.floats(-1e3, 1e3).filter(lambda x: abs(x) > 1e-6), seed=st.integers(0, 10_000))
def test_scaling(c, seed):
    est = sample_uniform_sphere(200, seed)
    qry = sample_uniform_sphere(8, seed + 1)
    f, fq = eval_test_function(est), eval_test_function(qry)
    base = graph_laplacian_apply(est, f, qry, 0.2, query_values=fq)
    scaled = graph_laplacian_apply(est, c * f, qry, 0.2, query_values=c * fq)
    assert np.allclose(scaled, c * base, rtol=1e-13, atol=0)


def test_permutation_invariance(small_bench, rng):
    est, val = small_bench
    grid = BandwidthGrid.logspace(0.02, 0.8, 5)
    base = graph_laplacian_family(est, val, grid).values
    perm = rng.permutation(est.n)
    shuffled = PointCloud(est.points[perm], 2, est.f[perm])
    other = graph_laplacian_family(shuffled, val, grid).values
    assert np.max(np.abs(other - base) / np.abs(base)) <= 1e-12


def test_cutoff_agrees_with_exact():
    grid = BandwidthGrid.logspace(0.02, 0.8, 15)
    est = sample_uniform_sphere(20_000, 5, (0, 0))
    val = sample_validation_sphere(300, 5, (0, 1))
    est.f, val.f = eval_test_function(est), eval_test_function(val)
    exact = graph_laplacian_family(est, val, grid).values
    cut = graph_laplacian_family(est, val, grid, cutoff=CUTOFF_RADIUS).values
    assert np.max(np.abs(cut - exact) / np.abs(exact)) <= 1e-10


def test_thread_count_does_not_change_output(small_bench):
    est, val = small_bench
    grid = [0.1, 0.4]
    set_threads(1)
    one = graph_laplacian_family(est, val, grid).values
    set_threads(None)
    many = graph_laplacian_family(est, val, grid).values
    assert np.array_equal(one, many)


def test_u_shape_on_sphere_bench():
    grid = BandwidthGrid([0.02, 0.15, 0.8])
    est = sample_uniform_sphere(50_000, 21, (0, 0))
    val = sample_validation_sphere(300, 21, (0, 1))
    est.f, val.f = eval_test_function(est), eval_test_function(val)
    fam = graph_laplacian_family(est, val, grid)
    target = target_operator(val, "weighted")
    mse = np.mean((fam.values - target) ** 2, axis=1)
    assert np.all(np.isfinite(mse))
    assert mse[1] < mse[0] and mse[1] < mse[2]


def test_family_rejects_bad_shape():
    with pytest.raises(ValueError):
        EstimatorFamily(BandwidthGrid([0.1, 0.2]), np.zeros((3, 4)), 10, 4)
    with pytest.raises(FloatingPointError):
        EstimatorFamily(BandwidthGrid([0.1]), np.array([[np.inf]]), 10, 1)
