"""Bandwidth-jump calibration of the Lepski constants.

With ``b = a``, the selected bandwidth ``h(a, a)`` is traced while ``a``
decreases.  The main jump is the largest single-step drop of ``log h(a, a)``
along that path; ``a0`` is the grid value just before it, and the final
choice is ``h(a0, 2 a0)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel_estimator import EstimatorFamily
from .lepski_select import LepskiSelection, LepskiSelector
from .theory_constants import TheoryConfig


class NoJumpError(RuntimeError):
    """The path ``a -> h(a, a)`` never drops; widen the ``a`` grid."""


def default_a_grid(a_max: float = 1e4, a_min: float = 1e-6, num: int = 101) -> np.ndarray:
    """Geometric grid, descending from ``a_max`` to ``a_min`` (10 points per decade).

    The jump location scales with the squared magnitude of the estimates,
    because the practical variance term carries no constants, so the default
    spans ten decades.
    """
    return np.geomspace(a_max, a_min, num)


def _check_a_grid(a_grid) -> np.ndarray:
    a = np.asarray(a_grid, dtype=float).ravel()
    if a.size == 0:
        raise ValueError("empty a grid")
    if np.any(~(a > 0)) or np.any(np.diff(a) >= 0):
        raise ValueError("a grid must be positive and strictly descending")
    return a


@dataclass
class SelectionPath:
    a_grid: np.ndarray
    h_of_a: np.ndarray
    h_of_a_2a: np.ndarray

    def rows(self):
        for a, h1, h2 in zip(self.a_grid, self.h_of_a, self.h_of_a_2a):
            yield float(a), float(h1), float(h2)


def selection_path(family: EstimatorFamily, a_grid=None, mode: str = "practical",
                   cfg: TheoryConfig | None = None, selector: LepskiSelector | None = None) -> SelectionPath:
    a = _check_a_grid(default_a_grid() if a_grid is None else a_grid)
    sel = selector or LepskiSelector(family, mode, cfg)
    h_aa = np.array([sel.select(x, x).h_hat for x in a])
    h_a2a = np.array([sel.select(x, 2 * x).h_hat for x in a])
    return SelectionPath(a, h_aa, h_a2a)


def detect_jump(path: SelectionPath) -> float:
    """``a`` just before the largest drop of ``log h(a, a)``; ties toward larger ``a``."""
    h = np.asarray(path.h_of_a, dtype=float)
    if h.size < 2:
        raise ValueError("path needs at least two entries")
    drops = np.log(h[:-1]) - np.log(h[1:])
    top = drops.max()
    if not top > 0:
        raise NoJumpError("selected bandwidth never drops along the a grid")
    # drops equal up to rounding count as ties
    i = int(np.flatnonzero(drops >= top - 1e-9 * top)[0])
    return float(path.a_grid[i])


@dataclass
class CalibrationResult:
    a0: float
    selection: LepskiSelection
    path: SelectionPath

    def to_dict(self):
        out = self.selection.to_dict()
        out["a0"] = self.a0
        return out


def calibrate_and_select(family: EstimatorFamily, a_grid=None, mode: str = "practical",
                         cfg: TheoryConfig | None = None, strict: bool = False,
                         a0_override: float | None = None) -> CalibrationResult:
    """``h(a0, 2 a0)`` with ``a0`` from :func:`detect_jump`.

    ``a0_override`` skips jump detection; it exists for testing families whose
    path cannot jump, such as a single-bandwidth family.
    """
    sel = LepskiSelector(family, mode, cfg, strict)
    path = selection_path(family, a_grid, selector=sel)
    a0 = detect_jump(path) if a0_override is None else float(a0_override)
    return CalibrationResult(a0, sel.select(a0, 2 * a0), path)
