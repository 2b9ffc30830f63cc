"""Split-sample L2 norms and Monte-Carlo risk curves on the sphere bench."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bandwidths import BandwidthGrid
from .kernel_estimator import EstimatorFamily, graph_laplacian_family
from .manifold_lab import (TEST_FUNCTION, SphereFunction, sample_uniform_sphere,
                           sample_validation_sphere, target_operator)

# stream roles under one replicate index
ESTIMATION_STREAM = 0
VALIDATION_STREAM = 1


def empirical_sq_norm_diff(a, b) -> float:
    """Mean of ``(a - b)^2``: the validation-sample estimate of ``||a - b||^2 / mu(M)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("empty input")
    diff = a - b
    return float(np.mean(diff * diff))


def pairwise_sq_norms(values: np.ndarray) -> np.ndarray:
    """``N[k, l] = empirical_sq_norm_diff(values[k], values[l])`` for all rows."""
    v = np.asarray(values, dtype=float)
    diff = v[:, None, :] - v[None, :, :]
    return np.mean(diff * diff, axis=2)


@dataclass
class RiskTable:
    """Monte-Carlo risk per bandwidth, sorted by ``h``."""

    h: np.ndarray
    risk: np.ndarray
    mc_std: np.ndarray
    n1: int
    n2: int
    replicates: int

    def rows(self):
        for h, r, s in zip(self.h, self.risk, self.mc_std):
            yield float(h), float(r), float(s), self.n1, self.n2, self.replicates

    def risk_at(self, h: float) -> float:
        return float(self.risk[BandwidthGrid(self.h).index_of(h)])


def sphere_family(grid, n1: int, n2: int, seed: int, replicate: int = 0,
                  function: SphereFunction = TEST_FUNCTION, cutoff=None):
    """Estimator family of one replicate of the sphere bench.

    Returns ``(family, validation_cloud)``.  The estimation and validation
    samples come from independent streams ``(replicate, 0)`` and ``(replicate, 1)``.
    """
    est = sample_uniform_sphere(n1, seed, (replicate, ESTIMATION_STREAM))
    val = sample_validation_sphere(n2, seed, (replicate, VALIDATION_STREAM))
    est.f = function.ambient(est.points)
    val.f = function.ambient(val.points)
    return graph_laplacian_family(est, val, grid, cutoff=cutoff), val


def replicate_risks(grid, n1: int, n2: int, seed: int, replicate: int, convention: str = "weighted",
                    function: SphereFunction = TEST_FUNCTION, cutoff=None) -> np.ndarray:
    family, val = sphere_family(grid, n1, n2, seed, replicate, function, cutoff)
    target = target_operator(val, convention, function)
    return np.array([empirical_sq_norm_diff(row, target) for row in family.values])


def monte_carlo_risk(grid, n1: int, n2: int, replicates: int = 5, seed: int = 0,
                     convention: str = "weighted", function: SphereFunction = TEST_FUNCTION,
                     cutoff=None) -> RiskTable:
    """Average validation-sample squared error over independent replicates."""
    if not isinstance(grid, BandwidthGrid):
        grid = BandwidthGrid(grid)
    if n1 < 1 or n2 < 1 or replicates < 1:
        raise ValueError("n1, n2 and replicates must be >= 1")
    per_rep = np.stack([replicate_risks(grid, n1, n2, seed, r, convention, function, cutoff)
                        for r in range(replicates)])
    risk = per_rep.mean(axis=0)
    if replicates > 1:
        mc_std = per_rep.std(axis=0, ddof=1) / np.sqrt(replicates)
    else:
        mc_std = np.full(len(grid), np.nan)
    return RiskTable(np.array(grid.h), risk, mc_std, n1, n2, replicates)


def oracle_bandwidth(table: RiskTable) -> float:
    """Bandwidth of minimal risk; ties go to the larger ``h``."""
    risk = np.asarray(table.risk)
    if risk.size == 0:
        raise ValueError("empty risk table")
    best = np.flatnonzero(risk == risk.min())
    return float(table.h[best[-1]])
