"""Point clouds on test manifolds and analytic ground truth on the unit sphere.

Randomness
----------
Every random draw goes through :func:`make_rng`, which builds a
``numpy.random.Generator`` on the PCG64 bit generator from a
``SeedSequence(seed, spawn_key=stream)``.  A *stream* is a tuple of small
non-negative integers (for instance ``(replicate, role)``), so independent
samples of one run never share state and every run is bit-reproducible for a
fixed ``(seed, stream)`` across platforms.

Sphere sampling normalizes standard Gaussian vectors in R^3.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence
import math
import warnings

import numpy as np

#: Minimum ``sin(phi)`` for spherical-coordinate operations.
POLE_MARGIN = 1e-6
#: Step of the finite-difference fallback in spherical coordinates.
FD_STEP = 1e-4
SPHERE_AREA = 4.0 * math.pi


class PoleProximityError(ValueError):
    """A point is too close to a pole for spherical coordinates."""


class FiniteDifferenceWarning(RuntimeWarning):
    """The Richardson check of the finite-difference fallback disagreed."""


def make_rng(seed: int, stream: Sequence[int] = ()) -> np.random.Generator:
    """PCG64 generator for ``(seed, stream)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass
class PointCloud:
    """``n`` points in R^m lying on a ``d``-dimensional manifold.

    ``f`` optionally caches function values aligned with the rows of ``points``.
    """

    points: np.ndarray
    intrinsic_dim: int
    f: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1 and pts.size == 0:
            pts = pts.reshape(0, 3)
        if pts.ndim != 2:
            raise ValueError("points must be an n x m array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        d = int(self.intrinsic_dim)
        if d < 1 or d > pts.shape[1]:
            raise ValueError(f"intrinsic dimension {d} incompatible with ambient dimension {pts.shape[1]}")
        self.points = pts
        self.intrinsic_dim = d
        if self.f is not None:
            f = np.asarray(self.f, dtype=float)
            if f.shape != (pts.shape[0],):
                raise ValueError("f must have one value per point")
            self.f = f

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n

    def with_values(self, f) -> "PointCloud":
        return PointCloud(self.points, self.intrinsic_dim, f)


@dataclass(frozen=True)
class SphericalPoint:
    """Azimuth ``theta`` in [0, 2 pi) and polar angle ``phi`` in [0, pi]."""

    theta: float
    phi: float

    def __post_init__(self):
        if not (0.0 <= self.theta < 2.0 * math.pi):
            raise ValueError(f"theta={self.theta} outside [0, 2pi)")
        if not (0.0 <= self.phi <= math.pi):
            raise ValueError(f"phi={self.phi} outside [0, pi]")

    def is_singular(self, margin: float = POLE_MARGIN) -> bool:
        return math.sin(self.phi) < margin

    def to_cartesian(self) -> np.ndarray:
        s = math.sin(self.phi)
        return np.array([s * math.cos(self.theta), s * math.sin(self.theta), math.cos(self.phi)])

    @classmethod
    def from_cartesian(cls, x) -> "SphericalPoint":
        x = np.asarray(x, dtype=float)
        r = float(np.linalg.norm(x))
        phi = math.acos(min(1.0, max(-1.0, x[2] / r)))
        theta = math.atan2(x[1], x[0]) % (2.0 * math.pi)
        if theta >= 2.0 * math.pi:
            theta = 0.0
        return cls(theta, phi)


def sample_uniform_sphere(n: int, seed: int, stream: Sequence[int] = ()) -> PointCloud:
    """``n`` i.i.d. uniform points on S^2 (m=3, d=2)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = make_rng(seed, stream)
    g = rng.standard_normal((n, 3))
    norms = np.sqrt(np.einsum("ij,ij->i", g, g))
    return PointCloud(g / norms[:, None], 2)


def sample_validation_sphere(n: int, seed: int, stream: Sequence[int] = (),
                             margin: float = POLE_MARGIN) -> PointCloud:
    """Uniform sphere sample with rows inside the pole margin redrawn.

    Redraws come from the same generator, in row order, so the result stays
    deterministic for fixed ``(seed, stream)``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = make_rng(seed, stream)
    g = rng.standard_normal((n, 3))
    pts = g / np.linalg.norm(g, axis=1)[:, None]
    while True:
        bad = np.flatnonzero(np.hypot(pts[:, 0], pts[:, 1]) < margin)
        if bad.size == 0:
            break
        for i in bad:
            v = rng.standard_normal(3)
            pts[i] = v / np.linalg.norm(v)
    return PointCloud(pts, 2)


# ---------------------------------------------------------------------------
# Functions on the sphere
# ---------------------------------------------------------------------------

def _require_3d(points) -> np.ndarray:
    pts = points.points if isinstance(points, PointCloud) else np.asarray(points, dtype=float)
    pts = np.atleast_2d(pts)
    if pts.shape[1] != 3:
        raise ValueError(f"expected points in R^3, got ambient dimension {pts.shape[1]}")
    return pts


@dataclass
class SphereFunction:
    """A smooth function on S^2 with optional closed-form derivatives.

    ``ambient(pts)`` evaluates an extension to R^3 on an ``n x 3`` array.
    ``ambient_laplacian(pts)``, when given, returns the Laplace-Beltrami
    operator on the unit sphere at unit-norm points.  ``polar_partials(theta,
    phi)``, when given, returns ``(u_thth, u_ph, u_phph)``.
    """

    name: str
    ambient: Callable[[np.ndarray], np.ndarray]
    ambient_laplacian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    polar_partials: Optional[Callable[[np.ndarray, np.ndarray], tuple]] = None

    def polar(self, theta, phi):
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        s = np.sin(phi)
        pts = np.stack([s * np.cos(theta), s * np.sin(theta), np.cos(phi)], axis=-1)
        out = self.ambient(pts.reshape(-1, 3)).reshape(np.shape(theta * phi))
        return out if out.ndim else float(out)

    def __call__(self, theta, phi):
        return self.polar(theta, phi)

    def __add__(self, other: "SphereFunction") -> "SphereFunction":
        return linear_combination([(1.0, self), (1.0, other)])

    def __rmul__(self, c: float) -> "SphereFunction":
        return linear_combination([(float(c), self)])

    __mul__ = __rmul__


def linear_combination(terms) -> SphereFunction:
    """``sum(c * u)`` with closed forms kept wherever every term has one."""
    terms = [(float(c), u) for c, u in terms]

    def ambient(pts):
        return sum(c * u.ambient(pts) for c, u in terms)

    lap = None
    if all(u.ambient_laplacian is not None for _, u in terms):
        def lap(pts):
            return sum(c * u.ambient_laplacian(pts) for c, u in terms)

    partials = None
    if all(u.polar_partials is not None for _, u in terms):
        def partials(theta, phi):
            parts = [u.polar_partials(theta, phi) for _, u in terms]
            return tuple(sum(c * p[k] for (c, _), p in zip(terms, parts)) for k in range(3))

    name = " + ".join(f"{c:g}*{u.name}" for c, u in terms)
    return SphereFunction(name, ambient, lap, partials)


def _bench_parts(pts):
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    g = x * x + y * y + z
    s = 0.5 * np.sin(2.0 * x)          # sin x cos x
    s1 = np.cos(2.0 * x)
    s2 = -2.0 * np.sin(2.0 * x)
    return x, y, z, g, s, s1, s2


def bench_function_values(pts) -> np.ndarray:
    pts = _require_3d(pts)
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    return (x * x + y * y + z) * np.sin(x) * np.cos(x)


def _embedded_laplacian(grad, hess, pts):
    # Laplace-Beltrami on the unit sphere from ambient derivatives:
    # tr(H) - x^T H x - 2 x . grad f, valid for any smooth extension.
    tr = hess[:, 0, 0] + hess[:, 1, 1] + hess[:, 2, 2]
    xhx = np.einsum("ni,nij,nj->n", pts, hess, pts)
    xg = np.einsum("ni,ni->n", pts, grad)
    return tr - xhx - 2.0 * xg


def bench_function_laplacian(pts) -> np.ndarray:
    pts = _require_3d(pts)
    x, y, z, g, s, s1, s2 = _bench_parts(pts)
    n = pts.shape[0]
    grad = np.empty((n, 3))
    grad[:, 0] = 2.0 * x * s + g * s1
    grad[:, 1] = 2.0 * y * s
    grad[:, 2] = s
    hess = np.zeros((n, 3, 3))
    hess[:, 0, 0] = 2.0 * s + 4.0 * x * s1 + g * s2
    hess[:, 1, 1] = 2.0 * s
    hess[:, 0, 1] = hess[:, 1, 0] = 2.0 * y * s1
    hess[:, 0, 2] = hess[:, 2, 0] = s1
    return _embedded_laplacian(grad, hess, pts)


#: f(x, y, z) = (x^2 + y^2 + z) sin x cos x restricted to S^2.
TEST_FUNCTION = SphereFunction("test", bench_function_values, bench_function_laplacian)


def constant_function(c: float = 1.0) -> SphereFunction:
    c = float(c)
    return SphereFunction(
        f"const({c:g})",
        lambda pts: np.full(np.atleast_2d(pts).shape[0], c),
        lambda pts: np.zeros(np.atleast_2d(pts).shape[0]),
        lambda th, ph: (np.zeros_like(np.asarray(ph, float)),) * 3,
    )


COS_PHI = SphereFunction(
    "cos_phi",
    lambda pts: np.atleast_2d(pts)[:, 2].copy(),
    lambda pts: -2.0 * np.atleast_2d(pts)[:, 2],
    lambda th, ph: (np.zeros_like(np.asarray(ph, float)), -np.sin(ph), -np.cos(ph)),
)

FUNCTIONS = {"test": TEST_FUNCTION, "cos_phi": COS_PHI, "const": constant_function(1.0)}


def get_function(name: str) -> SphereFunction:
    if name.startswith("const:"):
        return constant_function(float(name.split(":", 1)[1]))
    try:
        return FUNCTIONS[name]
    except KeyError:
        raise ValueError(f"unknown function {name!r}; known: {sorted(FUNCTIONS)} or const:<c>") from None


def eval_test_function(points) -> np.ndarray:
    """(x^2 + y^2 + z) sin(x) cos(x) per row of an ``n x 3`` cloud."""
    return bench_function_values(points)


# ---------------------------------------------------------------------------
# Laplace-Beltrami operator on S^2
# ---------------------------------------------------------------------------

def _fd_first(g, x, h):
    return (-g(x + 2 * h) + 8 * g(x + h) - 8 * g(x - h) + g(x - 2 * h)) / (12 * h)


def _fd_second(g, x, h):
    return (-g(x + 2 * h) + 16 * g(x + h) - 30 * g(x) + 16 * g(x - h) - g(x - 2 * h)) / (12 * h * h)


def _fd_laplacian(u, theta, phi, h):
    u_thth = _fd_second(lambda t: u(t, phi), theta, h)
    u_ph = _fd_first(lambda p: u(theta, p), phi, h)
    u_phph = _fd_second(lambda p: u(theta, p), phi, h)
    s = math.sin(phi)
    return u_thth / (s * s) + u_phph + math.cos(phi) / s * u_ph


def analytic_sphere_laplacian(u, p: SphericalPoint, margin: float = POLE_MARGIN,
                              fd_step: float = FD_STEP, richardson_rtol: float = 1e-6) -> float:
    """Laplace-Beltrami operator of ``u`` on the unit sphere at ``p``.

    Uses ``u.polar_partials`` or ``u.ambient_laplacian`` when ``u`` is a
    :class:`SphereFunction` carrying them; otherwise (including plain
    callables ``u(theta, phi)``) falls back to 5-point central differences
    with step ``fd_step``, cross-checked against step ``2 * fd_step``.
    """
    if p.is_singular(margin):
        raise PoleProximityError(f"sin(phi)={math.sin(p.phi):.3g} below pole margin {margin:g}")
    if isinstance(u, SphereFunction):
        if u.polar_partials is not None:
            u_thth, u_ph, u_phph = (float(v) for v in u.polar_partials(p.theta, p.phi))
            s = math.sin(p.phi)
            return u_thth / (s * s) + u_phph + math.cos(p.phi) / s * u_ph
        if u.ambient_laplacian is not None:
            return float(u.ambient_laplacian(p.to_cartesian()[None, :])[0])
    value = _fd_laplacian(u, p.theta, p.phi, fd_step)
    coarse = _fd_laplacian(u, p.theta, p.phi, 2 * fd_step)
    if abs(value - coarse) > richardson_rtol * max(1.0, abs(value)):
        warnings.warn(f"finite-difference Laplacian unstable at {p}: {value!r} vs {coarse!r}",
                      FiniteDifferenceWarning, stacklevel=2)
    return value


def target_operator(points, convention: str = "analytic", function: SphereFunction = TEST_FUNCTION,
                    margin: float = POLE_MARGIN) -> np.ndarray:
    """Ground-truth operator at sphere points for the uniform density.

    ``analytic`` is the Laplace-Beltrami operator of ``function``;
    ``weighted`` multiplies it by the uniform density 1/(4 pi).
    """
    pts = _require_3d(points)
    if convention not in ("analytic", "weighted"):
        raise ValueError(f"unknown convention {convention!r}")
    if pts.shape[0] and np.min(np.hypot(pts[:, 0], pts[:, 1])) < margin:
        raise PoleProximityError("a point lies within the pole margin")
    if function.ambient_laplacian is not None:
        lap = np.asarray(function.ambient_laplacian(pts), dtype=float)
    else:
        lap = np.array([analytic_sphere_laplacian(function, SphericalPoint.from_cartesian(x), margin)
                        for x in pts])
    if convention == "weighted":
        lap = lap / SPHERE_AREA
    return lap
