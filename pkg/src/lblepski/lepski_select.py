"""Lepski's rule for picking one graph Laplacian out of a bandwidth family.

For constants ``0 < a <= b`` the selected bandwidth minimizes ``B(h) + b V(h)``
where ``B(h) = max_{h' <= h} [ N(h', h) - a V(h') ]_+`` and ``N`` is the
empirical squared distance between two estimators on the validation sample.

``V`` is either the constant-free ``1 / (n h^(d+2))`` ("practical") or the
explicit variance bound ("theoretical").
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from .bandwidths import BandwidthGrid, check_bandwidth, theoretical_grid  # noqa: F401
from .empirical_norms import pairwise_sq_norms
from .kernel_estimator import EstimatorFamily
from .theory_constants import TheoryConfig, variance_bound

MODES = ("practical", "theoretical")


class InadmissibleBandwidthWarning(UserWarning):
    """A grid bandwidth violates the reach/injectivity-radius condition."""


def variance_term(h, n: int, d: int = 2, mode: str = "practical", cfg: TheoryConfig | None = None):
    """Variance proxy ``V(h)`` for an estimation sample of size ``n``."""
    h_arr = np.asarray(h, dtype=float)
    if np.any(~(h_arr > 0)) or not n > 0:
        raise ValueError("h and n must be positive")
    if mode == "practical":
        out = 1.0 / (n * h_arr ** (d + 2))
    elif mode == "theoretical":
        cfg = cfg or TheoryConfig(d=d)
        out = variance_bound(h_arr, n, cfg)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return float(out) if np.ndim(out) == 0 else np.asarray(out, dtype=float)


def check_admissible(h: float, cfg: TheoryConfig) -> bool:
    """``2 sqrt(d+4) h sqrt(log(1/h)) <= rho``; ``h >= 1`` is never admissible."""
    h = check_bandwidth(h)
    if h >= 1.0:
        return False
    return 2.0 * math.sqrt(cfg.d + 4) * h * math.sqrt(math.log(1.0 / h)) <= cfg.rho


def bias_table(norms: np.ndarray, a: float, V: np.ndarray) -> np.ndarray:
    """``B`` for every grid point from the pairwise squared-norm matrix."""
    V = np.asarray(V, dtype=float)
    k = V.size
    B = np.zeros(k)
    for j in range(k):
        vals = norms[: j + 1, j] - a * V[: j + 1]
        B[j] = max(0.0, float(vals.max()))
    return B


def bias_term(family: EstimatorFamily, h: float, a: float, V) -> float:
    if not a > 0:
        raise ValueError("a must be positive")
    j = family.grid.index_of(h)
    norms = pairwise_sq_norms(family.values[: j + 1])
    return float(bias_table(norms, a, np.asarray(V)[: j + 1])[j])


def argmin_largest(objective) -> tuple[int, list[int]]:
    """Index of the minimum (largest index among exact ties) and the tie set."""
    obj = np.asarray(objective, dtype=float)
    ties = np.flatnonzero(obj == obj.min())
    return int(ties[-1]), ties.tolist()


@dataclass
class LepskiSelection:
    h_hat: float
    a: float
    b: float
    grid: list
    B: list
    V: list
    objective: list
    tie_break: list
    mode: str = "practical"
    warnings: list = field(default_factory=list)

    @property
    def index(self) -> int:
        return self.grid.index(self.h_hat)

    def to_dict(self):
        return {"h_hat": self.h_hat, "a": self.a, "b": self.b, "grid": self.grid, "B": self.B,
                "V": self.V, "objective": self.objective, "tie_break": self.tie_break,
                "mode": self.mode, "warnings": self.warnings}


class LepskiSelector:
    """Caches the pairwise norms of a family so many ``(a, b)`` pairs are cheap."""

    def __init__(self, family: EstimatorFamily, mode: str = "practical",
                 cfg: TheoryConfig | None = None, strict: bool = False):
        if len(family.grid) == 0:
            raise ValueError("empty bandwidth grid")
        self.family = family
        self.mode = mode
        self.cfg = cfg
        self.norms = pairwise_sq_norms(family.values)
        self.V = np.atleast_1d(variance_term(family.grid.h, family.n1, family.intrinsic_dim, mode, cfg))
        self.keep = np.arange(len(family.grid))
        self.notes = []
        if cfg is not None:
            bad = [k for k, h in enumerate(family.grid) if not check_admissible(h, cfg)]
            if bad:
                hs = ", ".join(f"{family.grid[k]:.4g}" for k in bad)
                msg = f"bandwidths violating the admissibility condition (rho={cfg.rho:g}): {hs}"
                self.notes.append(msg)
                warnings.warn(msg, InadmissibleBandwidthWarning, stacklevel=3)
                if strict:
                    self.keep = np.array([k for k in self.keep if k not in bad], dtype=int)
                    if self.keep.size == 0:
                        raise ValueError("no admissible bandwidth in grid")

    def select(self, a: float, b: float) -> LepskiSelection:
        if not (0 < a <= b):
            raise ValueError(f"need 0 < a <= b, got a={a!r}, b={b!r}")
        keep = self.keep
        norms = self.norms[np.ix_(keep, keep)]
        V = self.V[keep]
        B = bias_table(norms, a, V)
        obj = B + b * V
        j, ties = argmin_largest(obj)
        grid = [float(self.family.grid[k]) for k in keep]
        return LepskiSelection(grid[j], float(a), float(b), grid, B.tolist(), V.tolist(),
                               obj.tolist(), [grid[t] for t in ties], self.mode, list(self.notes))


def select_bandwidth(family: EstimatorFamily, a: float, b: float, mode: str = "practical",
                     cfg: TheoryConfig | None = None, strict: bool = False) -> LepskiSelection:
    """Minimizer of ``B(h) + b V(h)`` over the family grid, ties to the largest ``h``.

    When ``cfg`` is given, grid points failing :func:`check_admissible` raise
    an :class:`InadmissibleBandwidthWarning`; with ``strict`` they are dropped.
    """
    return LepskiSelector(family, mode, cfg, strict).select(a, b)


def select_from_tables(B, V, b: float) -> int:
    """Grid index minimizing ``B + b V`` with ties toward the largest index."""
    return argmin_largest(np.asarray(B, dtype=float) + b * np.asarray(V, dtype=float))[0]
