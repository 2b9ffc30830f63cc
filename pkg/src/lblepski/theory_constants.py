"""Constants of the variance bound and of the oracle inequality.

All d-dimensional Gaussian-type integrals are radial, so they reduce to
``S_{d-1} * int_0^inf g(r) r^(d-1) dr`` with ``S_{d-1} = 2 pi^(d/2) / Gamma(d/2)``.
Two rules are available for the 1-D integral: ``"adaptive"`` (QUADPACK on
[0, inf)) and ``"gauss"`` (composite Gauss-Legendre on [0, 60] with a
square-root substitution on the first panel).
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from functools import lru_cache
import math

import numpy as np
from scipy import integrate, special


class OutOfTheoremRange(ValueError):
    """The Lepski constant ``a`` gives a non-positive epsilon."""


@dataclass(frozen=True)
class TheoryConfig:
    """Geometric and density constants supplied by the user.

    Defaults are the flat-space limit ``C = C1 = 0`` with the uniform density
    on the unit sphere (``mu = 4 pi``, ``p_inf = 1 / (4 pi)``), unit reach
    ``rho`` and ``C_F = 1``.
    """

    d: int = 2
    m: int = 3
    C: float = 0.0
    C1: float = 0.0
    rho: float = 1.0
    mu: float = 4.0 * math.pi
    p_inf: float = 1.0 / (4.0 * math.pi)
    p1_inf: float = 0.0
    p2_inf: float = 0.0
    C_F: float = 1.0

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError("d must be a positive integer")
        if self.m < self.d:
            raise ValueError("ambient dimension m must be >= d")
        if self.C < 0 or self.C1 < 0:
            raise ValueError("C and C1 must be non-negative")
        if self.p1_inf < 0 or self.p2_inf < 0:
            raise ValueError("density derivative bounds must be non-negative")
        for name in ("rho", "mu", "p_inf", "C_F"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def to_dict(self):
        return asdict(self)


def sphere_surface(d: int) -> float:
    """Surface area of the unit sphere S^(d-1) in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(40)
_R_MAX = 60.0


def _gauss_radial(g_r):
    # first panel with r = t^2 for integrands like r^beta near 0
    t = 0.5 * (_GL_X + 1.0)
    total = float(np.sum(0.5 * _GL_W * g_r(t * t) * 2.0 * t))
    edges = np.arange(1.0, _R_MAX + 1.0)
    for lo, hi in zip(edges[:-1], edges[1:]):
        r = 0.5 * (hi - lo) * _GL_X + 0.5 * (hi + lo)
        total += float(np.sum(0.5 * (hi - lo) * _GL_W * g_r(r)))
    return total


def radial_integral(g, d: int, method: str = "adaptive") -> float:
    """``int_{R^d} g(|u|) du`` for a radial, rapidly decaying ``g``."""
    integrand = lambda r: g(r) * r ** (d - 1)
    if method == "adaptive":
        val, _ = integrate.quad(integrand, 0.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=500)
    elif method == "gauss":
        val = _gauss_radial(lambda r: np.asarray(integrand(np.asarray(r)), dtype=float))
    else:
        raise ValueError(f"unknown quadrature method {method!r}")
    return sphere_surface(d) * val


def omega(d: int) -> float:
    return 3.0 * 2.0 ** (d / 2.0 - 1.0)


@lru_cache(maxsize=None)
def kernel_norms(d: int, method: str = "adaptive") -> tuple[float, float]:
    """``(||K_d||_1, ||K_d||_2^2)`` of the d-dimensional Gaussian kernel."""
    c = (4.0 * math.pi) ** (-d / 2.0)
    l1 = radial_integral(lambda r: c * np.exp(-r * r / 4.0), d, method)
    l2 = radial_integral(lambda r: c * c * np.exp(-r * r / 2.0), d, method)
    return l1, l2


def compute_D(alpha: float, cfg: TheoryConfig, method: str = "adaptive") -> float:
    """``(4pi)^-d int (C|u|^(alpha+2)/2 + C1|u|^alpha) exp(-|u|^2/4) du``."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if cfg.C == 0 and cfg.C1 == 0:
        return 0.0
    g = lambda r: (cfg.C * r ** (alpha + 2) / 2.0 + cfg.C1 * r ** alpha) * np.exp(-r * r / 4.0)
    return (4.0 * math.pi) ** (-cfg.d) * radial_integral(g, cfg.d, method)


def compute_D_tilde(alpha: float, cfg: TheoryConfig, method: str = "adaptive") -> float:
    """``(4pi)^(-d/2) int (C|u|^(alpha+2)/4 + C1|u|^alpha) exp(-|u|^2/8) du``."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if cfg.C == 0 and cfg.C1 == 0:
        return 0.0
    g = lambda r: (cfg.C * r ** (alpha + 2) / 4.0 + cfg.C1 * r ** alpha) * np.exp(-r * r / 8.0)
    return (4.0 * math.pi) ** (-cfg.d / 2.0) * radial_integral(g, cfg.d, method)


@lru_cache(maxsize=256)
def _alpha_coefficients(cfg: TheoryConfig):
    _, k2 = kernel_norms(cfg.d)
    lead = compute_D(4, cfg) + 1.5 * omega(cfg.d) * k2 + 2.0 * cfg.mu / (4.0 * math.pi) ** cfg.d
    return lead, compute_D(6, cfg) / 4.0


@lru_cache(maxsize=256)
def _beta_coefficients(cfg: TheoryConfig):
    k1, _ = kernel_norms(cfg.d)
    lin = omega(cfg.d) * k1 + 2.0 * cfg.mu / (4.0 * math.pi) ** (cfg.d / 2.0)
    return lin, compute_D_tilde(3, cfg), compute_D_tilde(4, cfg) / 2.0


def compute_alpha_d(h, cfg: TheoryConfig):
    """``h^2 (D_4 + 3/2 omega_d ||K_d||_2^2 + 2 mu / (4pi)^d) + h^4 D_6 / 4``."""
    lead, quart = _alpha_coefficients(cfg)
    h = np.asarray(h, dtype=float)
    out = h ** 2 * lead + h ** 4 * quart
    return float(out) if out.ndim == 0 else out


def compute_beta_d(h, cfg: TheoryConfig):
    """``h (omega_d ||K_d||_1 + 2 mu / (4pi)^(d/2)) + h^2 D~_3 + h^3 D~_4 / 2``."""
    lin, quad, cub = _beta_coefficients(cfg)
    h = np.asarray(h, dtype=float)
    out = h * lin + h ** 2 * quad + h ** 3 * cub
    return float(out) if out.ndim == 0 else out


def compute_gamma_d(h, cfg: TheoryConfig):
    if not cfg.p_inf > 0:
        raise ValueError("p_inf must be positive")
    k1, k2 = kernel_norms(cfg.d)
    w = omega(cfg.d)
    num = w * k2 + compute_alpha_d(h, cfg)
    den = (w * k1 + compute_beta_d(h, cfg)) ** 2
    h = np.asarray(h, dtype=float)
    out = num / den / (h ** cfg.d * cfg.p_inf)
    return float(out) if np.ndim(out) == 0 else out


def epsilon_from_a(a: float) -> float:
    """``sqrt(a)/2 - 1``; positive only for ``a > 4``."""
    return math.sqrt(a) / 2.0 - 1.0


def _delta_terms(hs, a, n, cfg, eps):
    eps = epsilon_from_a(a) if eps is None else float(eps)
    if eps <= 0:
        raise OutOfTheoremRange(f"epsilon={eps:g} <= 0 (a={a:g}); the oracle inequality needs a > 4")
    if n < 1:
        raise ValueError("n must be >= 1")
    sample_term = math.exp(-min(eps * eps, eps) * math.sqrt(n) / 24.0)
    gam = np.atleast_1d(compute_gamma_d(np.asarray(hs, dtype=float), cfg))
    return np.maximum(sample_term, np.exp(-(eps * eps / 3.0) * gam))


def compute_delta(h: float, grid, a: float, n: int, cfg: TheoryConfig, eps: float | None = None) -> float:
    """Sum over grid bandwidths ``h' <= h`` of the deviation probabilities.

    ``eps`` overrides the default ``sqrt(a)/2 - 1``.
    """
    hs = np.asarray(grid, dtype=float)
    hs = hs[hs <= h * (1 + 1e-12)]
    if hs.size == 0:
        raise ValueError("no grid bandwidth <= h")
    return math.fsum(_delta_terms(hs, a, n, cfg, eps))


def success_probability(grid, a: float, n: int, cfg: TheoryConfig, eps: float | None = None) -> float:
    """``1 - 2 sum_h delta(h)``; may be negative when the bound is vacuous."""
    hs = np.sort(np.asarray(grid, dtype=float))
    terms = _delta_terms(hs, a, n, cfg, eps)
    # delta(h_k) = cumulative sum of terms up to k
    return 1.0 - 2.0 * math.fsum(np.cumsum(terms))


def tail_ratio_F(k: float, x: float) -> float:
    """``int_x^inf t^(k+1) exp(-t^2/4) dt / (x^k exp(-x^2/4))``."""
    if x < 0:
        raise ValueError("x must be >= 0")
    num, _ = integrate.quad(lambda t: t ** (k + 1) * math.exp(-(t * t - x * x) / 4.0), x, np.inf,
                            epsabs=0.0, epsrel=1e-13, limit=500)
    return num / (x ** k if k != 0 else 1.0)


def tail_ratio_F_closed(k: float, x: float) -> float:
    """Upper incomplete Gamma form of :func:`tail_ratio_F`."""
    q = k + 1.0
    num = 2.0 ** q * special.gamma((q + 1) / 2.0) * special.gammaincc((q + 1) / 2.0, x * x / 4.0)
    return num * math.exp(x * x / 4.0) / (x ** k if k != 0 else 1.0)


def compute_tau(d: int, method: str = "adaptive") -> float:
    return (4.0 * math.pi) ** (-d / 2.0) * radial_integral(lambda r: np.exp(-r * r / 8.0), d, method)


def compute_kappa(k: float) -> float:
    """``2 F_k(sqrt(2k)) / Gamma((k+1)/2)`` for ``k = d + sigma >= 0``."""
    if k < 0:
        raise ValueError("d + sigma must be >= 0")
    return 2.0 * tail_ratio_F(k, math.sqrt(2.0 * k)) / math.gamma((k + 1.0) / 2.0)


def compute_tau_kappa(d: int, sigma: int = 0) -> tuple[float, float]:
    return compute_tau(d), compute_kappa(d + sigma)


def variance_bound(h, n: int, cfg: TheoryConfig):
    """``2 C_F^2 / (n h^(d+2)) * (omega_d ||K_d||_2^2 + alpha_d(h))``."""
    _, k2 = kernel_norms(cfg.d)
    h = np.asarray(h, dtype=float)
    out = 2.0 * cfg.C_F ** 2 / (n * h ** (cfg.d + 2)) * (omega(cfg.d) * k2 + compute_alpha_d(h, cfg))
    return float(out) if out.ndim == 0 else out


@dataclass
class ConstantsReport:
    omega_d: float
    K1_norm: float
    K2_norm_sq: float
    tau_d: float
    D_alpha: dict = field(default_factory=dict)
    D_tilde_alpha: dict = field(default_factory=dict)
    kappa: dict = field(default_factory=dict)
    grid: list = field(default_factory=list)
    alpha_d: list = field(default_factory=list)
    beta_d: list = field(default_factory=list)
    gamma_d: list = field(default_factory=list)
    delta: list | None = None
    success_probability: float | None = None
    a: float | None = None
    n: int | None = None
    epsilon: float | None = None
    notes: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def to_dict(self):
        out = asdict(self)
        for key in ("D_alpha", "D_tilde_alpha", "kappa"):
            out[key] = {str(k): v for k, v in out[key].items()}
        return out


def constants_report(cfg: TheoryConfig, grid=(), a: float | None = None, n: int | None = None,
                     alphas=(3, 4, 5, 6), sigmas=(0, -1), eps: float | None = None) -> ConstantsReport:
    k1, k2 = kernel_norms(cfg.d)
    hs = [float(h) for h in grid]
    rep = ConstantsReport(
        omega_d=omega(cfg.d), K1_norm=k1, K2_norm_sq=k2, tau_d=compute_tau(cfg.d),
        D_alpha={al: compute_D(al, cfg) for al in alphas},
        D_tilde_alpha={al: compute_D_tilde(al, cfg) for al in alphas},
        kappa={cfg.d + s: compute_kappa(cfg.d + s) for s in sigmas if cfg.d + s >= 0},
        grid=hs,
        alpha_d=[compute_alpha_d(h, cfg) for h in hs],
        beta_d=[compute_beta_d(h, cfg) for h in hs],
        gamma_d=[compute_gamma_d(h, cfg) for h in hs],
        a=a, n=n, config=cfg.to_dict(),
    )
    if a is not None and n is not None and hs:
        rep.epsilon = epsilon_from_a(a) if eps is None else eps
        try:
            rep.delta = [compute_delta(h, hs, a, n, cfg, eps) for h in hs]
            rep.success_probability = success_probability(hs, a, n, cfg, eps)
        except OutOfTheoremRange as exc:
            rep.notes.append(f"out of theorem range: {exc}")
    return rep
