import math

import mpmath
import numpy as np
import pytest

from lblepski.bandwidths import theoretical_grid
from lblepski.theory_constants import (OutOfTheoremRange, TheoryConfig, compute_alpha_d, compute_beta_d,
                                       compute_D, compute_D_tilde, compute_delta, compute_gamma_d,
                                       compute_kappa, compute_tau, compute_tau_kappa, constants_report,
                                       kernel_norms, omega, radial_integral, sphere_surface,
                                       success_probability, tail_ratio_F, tail_ratio_F_closed)


def radial_moment(k, c, d):
    """Closed form of int_{R^d} |u|^k exp(-|u|^2 / c) du."""
    return sphere_surface(d) * 0.5 * c ** ((k + d) / 2) * math.gamma((k + d) / 2)


def F_by_parts(k, x):
    """Integration-by-parts recursion for int_x^inf t^q exp(-t^2/4) dt, q = k + 1."""
    def tail(q):
        if q == 1:
            return 2 * math.exp(-x * x / 4)
        if q == 0:
            return math.sqrt(math.pi) * math.erfc(x / 2)
        return 2 * x ** (q - 1) * math.exp(-x * x / 4) + 2 * (q - 1) * tail(q - 2)
    return tail(k + 1) / (x ** k * math.exp(-x * x / 4))


def test_sphere_surface():
    assert sphere_surface(1) == pytest.approx(2)
    assert sphere_surface(2) == pytest.approx(2 * math.pi)
    assert sphere_surface(3) == pytest.approx(4 * math.pi)


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5, 7])
@pytest.mark.parametrize("method", ["adaptive", "gauss"])
def test_kernel_norms(d, method):
    l1, l2 = kernel_norms(d, method)
    assert l1 == pytest.approx(1.0, abs=1e-10)
    assert l2 == pytest.approx((8 * math.pi) ** (-d / 2), rel=1e-10)


def test_kernel_norms_d2_values():
    l1, l2 = kernel_norms(2)
    assert l2 == pytest.approx(0.0397887, abs=1e-7)


def test_D_zero_constants():
    cfg = TheoryConfig()
    for a in (0, 2, 4.5):
        assert compute_D(a, cfg) == 0.0 and compute_D_tilde(a, cfg) == 0.0


def test_D0_closed_form():
    cfg = TheoryConfig(C=0.0, C1=1.0)
    assert compute_D(0, cfg) == pytest.approx(1 / (4 * math.pi), rel=1e-12)
    assert compute_D(0, cfg, "gauss") == pytest.approx(1 / (4 * math.pi), rel=1e-12)


@pytest.mark.parametrize("alpha", [0, 1, 2, 2.5, 3, 4, 6])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_D_dual_quadrature(alpha, d):
    cfg = TheoryConfig(d=d, m=max(d, 3), C=1.0, C1=0.7)
    for fn in (compute_D, compute_D_tilde):
        assert fn(alpha, cfg, "adaptive") == pytest.approx(fn(alpha, cfg, "gauss"), rel=1e-8)
    exact = (4 * math.pi) ** (-d) * (0.5 * radial_moment(alpha + 2, 4, d) + 0.7 * radial_moment(alpha, 4, d))
    assert compute_D(alpha, cfg) == pytest.approx(exact, rel=1e-10)
    exact_t = (4 * math.pi) ** (-d / 2) * (0.25 * radial_moment(alpha + 2, 8, d) + 0.7 * radial_moment(alpha, 8, d))
    assert compute_D_tilde(alpha, cfg) == pytest.approx(exact_t, rel=1e-10)


def test_D_monotone_in_constants():
    base = TheoryConfig(C=0.5, C1=0.5)
    for fn in (compute_D, compute_D_tilde):
        assert fn(3, TheoryConfig(C=0.6, C1=0.5)) > fn(3, base)
        assert fn(3, TheoryConfig(C=0.5, C1=0.6)) > fn(3, base)


def test_omega():
    assert omega(2) == 3.0
    assert omega(4) == 6.0


def test_alpha_d_hand_value():
    cfg = TheoryConfig()
    expected = 0.01 * (0 + 4.5 / (8 * math.pi) + 8 * math.pi / (16 * math.pi ** 2))
    assert compute_alpha_d(0.1, cfg) == pytest.approx(expected, rel=1e-12)


def test_alpha_leading_coefficient():
    cfg = TheoryConfig(C=0.3, C1=0.2)
    _, k2 = kernel_norms(2)
    lead = compute_D(4, cfg) + 1.5 * 3 * k2 + 2 * cfg.mu / (4 * math.pi) ** 2
    assert compute_alpha_d(1e-5, cfg) / 1e-10 == pytest.approx(lead, rel=1e-8)


def test_beta_hand_value():
    cfg = TheoryConfig(C=1.0, C1=0.5)
    h = 0.2
    lin = 3 * 1.0 + 2 * cfg.mu / (4 * math.pi)
    expected = h * lin + h ** 2 * compute_D_tilde(3, cfg) + h ** 3 * compute_D_tilde(4, cfg) / 2
    assert compute_beta_d(h, cfg) == pytest.approx(expected, rel=1e-12)


def test_alpha_beta_increasing():
    cfg = TheoryConfig(C=0.4, C1=0.1)
    hs = np.linspace(0.01, 0.99, 50)
    assert np.all(np.diff(compute_alpha_d(hs, cfg)) > 0)
    assert np.all(np.diff(compute_beta_d(hs, cfg)) > 0)


def test_gamma_independent_recomputation():
    cfg = TheoryConfig()
    h = 0.1
    mu, p = 4 * math.pi, 1 / (4 * math.pi)
    k2 = 1 / (8 * math.pi)
    alpha = h * h * (4.5 * k2 + 2 * mu / (4 * math.pi) ** 2)
    beta = h * (3 + 2 * mu / (4 * math.pi))
    expected = (3 * k2 + alpha) / (3 + beta) ** 2 / (h * h * p)
    assert compute_gamma_d(h, cfg) == pytest.approx(expected, rel=1e-10)


def test_gamma_scaling_and_limit():
    cfg = TheoryConfig(C=0.2, C1=0.3)
    doubled = TheoryConfig(C=0.2, C1=0.3, p_inf=2 * cfg.p_inf)
    assert compute_gamma_d(0.2, doubled) == pytest.approx(compute_gamma_d(0.2, cfg) / 2, rel=1e-15)
    l1, l2 = kernel_norms(2)
    h = 1e-6
    assert compute_gamma_d(h, cfg) * h ** 2 * cfg.p_inf == pytest.approx(l2 / (omega(2) * l1 ** 2), rel=1e-5)
    with pytest.raises(ValueError):
        TheoryConfig(p_inf=0.0)


def test_delta_extended_precision():
    cfg = TheoryConfig()
    n, a = 10 ** 6, 9.0
    grid = theoretical_grid(n).h
    mpmath.mp.dps = 40
    eps = mpmath.sqrt(a) / 2 - 1
    total = mpmath.mpf(0)
    for hp in grid:
        gam = mpmath.mpf(compute_gamma_d(hp, cfg))
        t1 = mpmath.exp(-min(eps ** 2, eps) * mpmath.sqrt(n) / 24)
        t2 = mpmath.exp(-(eps ** 2 / 3) * gam)
        total += max(t1, t2)
    assert compute_delta(grid[-1], grid, a, n, cfg) == pytest.approx(float(total), rel=1e-12)


def test_delta_single_term_and_range():
    cfg = TheoryConfig()
    grid = theoretical_grid(10 ** 6).h
    g0 = compute_gamma_d(grid[0], cfg)
    eps = 0.5
    expected = max(math.exp(-min(eps ** 2, eps) * 1000 / 24), math.exp(-eps ** 2 / 3 * g0))
    assert compute_delta(grid[0], grid, 9.0, 10 ** 6, cfg) == pytest.approx(expected, rel=1e-14)
    with pytest.raises(OutOfTheoremRange):
        compute_delta(grid[0], grid, 4.0, 100, cfg)
    assert compute_delta(grid[0], grid, 4.0, 100, cfg, eps=0.3) > 0


def test_delta_nonincreasing_in_n():
    cfg = TheoryConfig()
    grid = [0.05, 0.1, 0.2]
    vals = [compute_delta(0.2, grid, 16.0, n, cfg) for n in (10, 100, 10 ** 4, 10 ** 6, 10 ** 8)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    # strictly decreasing while the sqrt(n) term dominates
    assert vals[1] < vals[0] and vals[2] < vals[1]


def test_success_probability():
    cfg = TheoryConfig()
    grid = [0.05, 0.1]
    d1 = compute_delta(0.05, grid, 25.0, 10 ** 4, cfg)
    d2 = compute_delta(0.1, grid, 25.0, 10 ** 4, cfg)
    assert success_probability(grid, 25.0, 10 ** 4, cfg) == pytest.approx(1 - 2 * (d1 + d2), rel=1e-14)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_tau(d):
    assert compute_tau(d) == pytest.approx(2 ** (d / 2), rel=1e-10)
    assert compute_tau(d, "gauss") == pytest.approx(2 ** (d / 2), rel=1e-10)


def test_tau_values():
    assert compute_tau(2) == pytest.approx(2.0, abs=1e-8)
    assert compute_tau(1) == pytest.approx(1.41421, abs=1e-5)


@pytest.mark.parametrize("k", [0, 1, 2, 3, 4, 5])
@pytest.mark.parametrize("x", [0.5, 1.0, 2.0, 3.5, 6.0])
def test_F_three_ways(k, x):
    quad = tail_ratio_F(k, x)
    assert quad == pytest.approx(F_by_parts(k, x), rel=1e-10)
    assert quad == pytest.approx(tail_ratio_F_closed(k, x), rel=1e-10)


def test_kappa():
    for k in (1, 2, 3):
        x = math.sqrt(2 * k)
        assert compute_kappa(k) == pytest.approx(2 * F_by_parts(k, x) / math.gamma((k + 1) / 2), rel=1e-10)
    # k = 0: F_0(0) = int_0^inf t exp(-t^2/4) dt = 2
    assert compute_kappa(0) == pytest.approx(4 / math.sqrt(math.pi), rel=1e-10)
    tau, kappa = compute_tau_kappa(2, -1)
    assert tau == pytest.approx(2.0) and kappa == pytest.approx(compute_kappa(1))
    with pytest.raises(ValueError):
        compute_kappa(-1)


def test_radial_integral_rejects_method():
    with pytest.raises(ValueError):
        radial_integral(lambda r: np.exp(-r * r), 2, "simpson")


def test_constants_report():
    cfg = TheoryConfig()
    grid = theoretical_grid(10 ** 6).h
    rep = constants_report(cfg, grid, a=9.0, n=10 ** 6)
    d = rep.to_dict()
    assert d["omega_d"] == 3.0
    assert d["K1_norm"] == pytest.approx(1.0)
    assert len(d["delta"]) == len(grid) and d["epsilon"] == 0.5
    out_of_range = constants_report(cfg, grid, a=2.0, n=100)
    assert out_of_range.delta is None and out_of_range.notes
