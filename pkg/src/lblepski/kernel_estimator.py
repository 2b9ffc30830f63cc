"""Unnormalized graph Laplacian with the Gaussian kernel.

For an estimation sample ``X_1..X_n`` with values ``f(X_i)`` the estimator at
a query point ``y`` is::

    (1 / (n h^(d+2))) * sum_i K((y - X_i) / h) * (f(X_i) - f(y)),
    K(y) = (4 pi)^(-d/2) exp(-|y|^2 / 4)

with ``d`` the intrinsic dimension and ``|.|`` the ambient Euclidean norm.

Sums run sequentially per query with Neumaier compensation, so results do not
depend on the number of threads and are insensitive to the order of the
estimation points.  Terms whose exponential underflows to exactly zero are
skipped, which does not change any output bit.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numba
import numpy as np

from .bandwidths import BandwidthGrid, check_bandwidth
from .manifold_lab import PointCloud

#: Cut-off radius, in bandwidths, of the opt-in truncated mode.
CUTOFF_RADIUS = 12.0
# the TBB layer shipped here is too old; prefer OpenMP
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

# exp(-x) == 0.0 in double precision for x above this.
_UNDERFLOW_ARG = 746.0


def gaussian_kernel(y, d: int):
    """``(4 pi)^(-d/2) exp(-|y|^2 / 4)``; ``y`` may be a vector or an ``n x m`` array."""
    y = np.asarray(y, dtype=float)
    sq = np.sum(y * y, axis=-1)
    out = (4.0 * math.pi) ** (-d / 2.0) * np.exp(-sq / 4.0)
    return float(out) if np.ndim(out) == 0 else out


@numba.njit(parallel=True, cache=True)
def _laplacian_sums(est, f_est, qry, f_qry, inv4h2, cut2):
    # inv4h2 is decreasing (bandwidths ascending); cut2 < 0 disables cut-off.
    nq = qry.shape[0]
    n = est.shape[0]
    m = est.shape[1]
    nh = inv4h2.shape[0]
    out = np.empty((nh, nq))
    for j in numba.prange(nq):
        s = np.zeros(nh)
        c = np.zeros(nh)
        fy = f_qry[j]
        for i in range(n):
            d2 = 0.0
            for a in range(m):
                diff = qry[j, a] - est[i, a]
                d2 += diff * diff
            df = f_est[i] - fy
            for k in range(nh - 1, -1, -1):
                arg = d2 * inv4h2[k]
                if arg > _UNDERFLOW_ARG:
                    break
                if cut2[k] >= 0.0 and d2 > cut2[k]:
                    break
                t = math.exp(-arg) * df
                tot = s[k] + t
                if abs(s[k]) >= abs(t):
                    c[k] += (s[k] - tot) + t
                else:
                    c[k] += (t - tot) + s[k]
                s[k] = tot
        for k in range(nh):
            out[k, j] = s[k] + c[k]
    return out


def set_threads(n: int | None) -> None:
    """Worker threads for the estimator; ``None`` means all available cores."""
    numba.set_num_threads(numba.config.NUMBA_NUM_THREADS if n is None else int(n))


@dataclass
class EstimatorFamily:
    """Graph Laplacians on a bandwidth grid, evaluated at validation points.

    ``values[k]`` holds the estimator for ``grid[k]`` at the ``n2`` validation
    points; ``n1`` is the estimation-sample size.
    """

    grid: BandwidthGrid
    values: np.ndarray
    n1: int
    n2: int
    intrinsic_dim: int = 2

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.grid), self.n2):
            raise ValueError(f"values shape {self.values.shape} != ({len(self.grid)}, {self.n2})")
        if not np.all(np.isfinite(self.values)):
            raise FloatingPointError("estimator family has non-finite entries")

    def row(self, h: float) -> np.ndarray:
        return self.values[self.grid.index_of(h)]


def _query_values(queries: PointCloud, query_values, function):
    if query_values is not None:
        fq = np.asarray(query_values, dtype=float)
    elif queries.f is not None:
        fq = queries.f
    elif function is not None:
        fq = np.asarray(function.ambient(queries.points), dtype=float)
    else:
        raise ValueError("function values at the query points are unknown")
    if fq.shape != (queries.n,):
        raise ValueError(f"{fq.shape[0]} query values for {queries.n} query points")
    return fq


def _prepare(estimation, f_values, queries, query_values, function):
    if estimation.n == 0:
        raise ValueError("estimation sample is empty")
    f_est = estimation.f if f_values is None else np.asarray(f_values, dtype=float)
    if f_est is None:
        if function is None:
            raise ValueError("function values at the estimation points are unknown")
        f_est = np.asarray(function.ambient(estimation.points), dtype=float)
    if f_est.shape != (estimation.n,):
        raise ValueError(f"{np.shape(f_est)[0]} values for {estimation.n} estimation points")
    if queries.ambient_dim != estimation.ambient_dim:
        raise ValueError("query and estimation points live in different ambient spaces")
    fq = _query_values(queries, query_values, function)
    return (np.ascontiguousarray(estimation.points), np.ascontiguousarray(f_est),
            np.ascontiguousarray(queries.points), np.ascontiguousarray(fq))


def graph_laplacian_family(estimation: PointCloud, queries: PointCloud, grid, f_values=None,
                           query_values=None, function=None, cutoff: float | None = None) -> EstimatorFamily:
    """Estimator at every query point for every bandwidth of ``grid``.

    ``cutoff`` (in bandwidths, e.g. :data:`CUTOFF_RADIUS`) drops estimation
    points farther than ``cutoff * h`` from the query; ``None`` keeps all.
    """
    if not isinstance(grid, BandwidthGrid):
        grid = BandwidthGrid(grid)
    est, f_est, qry, fq = _prepare(estimation, f_values, queries, query_values, function)
    h = grid.h
    inv4h2 = 1.0 / (4.0 * h * h)
    cut2 = -np.ones_like(h) if cutoff is None else (float(cutoff) * h) ** 2
    d = estimation.intrinsic_dim
    n = est.shape[0]
    sums = _laplacian_sums(est, f_est, qry, fq, inv4h2, cut2)
    scale = (4.0 * math.pi) ** (-d / 2.0) / (n * h ** (d + 2))
    return EstimatorFamily(grid, sums * scale[:, None], n, qry.shape[0], d)


def graph_laplacian_apply(estimation: PointCloud, f_values, queries: PointCloud, h: float,
                          query_values=None, function=None, cutoff: float | None = None) -> np.ndarray:
    """Estimator with bandwidth ``h`` at each query point."""
    h = check_bandwidth(h)
    fam = graph_laplacian_family(estimation, queries, [h], f_values=f_values,
                                 query_values=query_values, function=function, cutoff=cutoff)
    return fam.values[0]
