"""Bandwidth grids."""

from __future__ import annotations

import math

import numpy as np


def check_bandwidth(h) -> float:
    h = float(h)
    if not (h > 0.0 and math.isfinite(h)):
        raise ValueError(f"bandwidth must be positive and finite, got {h!r}")
    return h


class BandwidthGrid:
    """Strictly increasing sequence of positive bandwidths."""

    def __init__(self, values):
        h = np.array(values, dtype=float).ravel()
        if h.size == 0:
            raise ValueError("bandwidth grid is empty")
        if not np.all(np.isfinite(h)) or np.any(h <= 0):
            raise ValueError("bandwidths must be positive and finite")
        if np.any(np.diff(h) <= 0):
            raise ValueError("bandwidth grid must be strictly increasing")
        h.setflags(write=False)
        self.h = h

    @classmethod
    def from_unsorted(cls, values) -> "BandwidthGrid":
        return cls(np.unique(np.asarray(values, dtype=float)))

    @classmethod
    def logspace(cls, h_min: float, h_max: float, num: int) -> "BandwidthGrid":
        if num < 1:
            raise ValueError("num must be >= 1")
        if num == 1:
            return cls([h_min])
        return cls(np.geomspace(h_min, h_max, num))

    def __len__(self):
        return self.h.size

    def __iter__(self):
        return iter(self.h.tolist())

    def __getitem__(self, k):
        return self.h[k]

    def __eq__(self, other):
        return isinstance(other, BandwidthGrid) and np.array_equal(self.h, other.h)

    def __repr__(self):
        return f"BandwidthGrid({self.h.tolist()!r})"

    def index_of(self, h: float) -> int:
        k = int(np.searchsorted(self.h, h))
        if k < self.h.size and self.h[k] == h:
            return k
        # tolerate round-tripped floats
        k = int(np.argmin(np.abs(self.h - h)))
        if abs(self.h[k] - h) <= 1e-12 * self.h[k]:
            return k
        raise KeyError(f"bandwidth {h!r} not in grid")


def theoretical_grid(n: int) -> BandwidthGrid:
    """``{exp(-k) : ceil(log log n) <= k <= floor(log n)}``, ascending in h."""
    if n < 3:
        raise ValueError("theoretical grid needs n >= 3")
    k_lo = math.ceil(math.log(math.log(n)))
    k_hi = math.floor(math.log(n))
    ks = range(k_hi, k_lo - 1, -1)
    return BandwidthGrid([math.exp(-k) for k in ks])


def parse_grid(spec: str, n: int | None = None) -> BandwidthGrid:
    """Parse ``"log:HMIN:HMAX:NUM"``, ``"theoretical"`` or ``"h1,h2,..."``."""
    spec = spec.strip()
    if not spec:
        raise ValueError("empty grid specification")
    if spec == "theoretical":
        if n is None:
            raise ValueError("theoretical grid needs the sample size")
        return theoretical_grid(n)
    if spec.startswith("log:"):
        parts = spec.split(":")
        if len(parts) != 4:
            raise ValueError(f"bad log grid {spec!r}; expected log:HMIN:HMAX:NUM")
        return BandwidthGrid.logspace(float(parts[1]), float(parts[2]), int(parts[3]))
    return BandwidthGrid.from_unsorted([float(v) for v in spec.split(",") if v.strip()])
