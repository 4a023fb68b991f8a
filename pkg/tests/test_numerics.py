import math

import numpy as np
import pytest

from stripstat.numerics import (
    CollisionError,
    ContourSpec,
    GammaFactor,
    GammaProduct,
    NonConvergenceError,
    bessel_k,
    digamma,
    gamma,
    gamma_product_residue,
    integrate_circle,
    integrate_vertical,
    log_gamma,
    rgamma,
    rgamma_pm2z,
    trigamma,
)

EULER = 0.57721566490153286061


def test_log_gamma_base_cases():
    assert abs(log_gamma(1.0)) < 1e-15
    assert abs(log_gamma(0.5) - math.log(math.sqrt(math.pi))) < 1e-14


def test_log_gamma_complex_matches_integral_oracle():
    # log of int_R exp((2+3i)s - e^s) ds, 20-digit quadrature
    ref = complex(-2.0928517530927333496, 2.3023965434668676262)
    assert abs(complex(log_gamma(2 + 3j)) - ref) < 1e-12


def test_log_gamma_recurrence_and_reflection():
    z = np.array([0.3 + 0.7j, 2.5 - 4j, -3.2 + 0.1j, 12 + 30j])
    lhs = np.exp(log_gamma(z + 1))
    rhs = z * np.exp(log_gamma(z))
    assert np.allclose(lhs, rhs, rtol=1e-12)
    w = 0.3 + 0.4j
    refl = gamma(w) * gamma(1 - w) * np.sin(np.pi * w)
    assert abs(refl - np.pi) < 1e-12


def test_rgamma_zero_at_poles():
    assert rgamma(0.0) == 0
    assert abs(rgamma(-3.0)) < 1e-300
    assert abs(rgamma(4.0) - 1 / 6) < 1e-15


def test_rgamma_pm2z_entire_at_origin():
    # 1/(Gamma(2z) Gamma(-2z)) = -2z sin(2 pi z) / pi
    for z in (1e-9, 0.25 + 0.1j, 1.3j):
        expect = -2 * z * np.sin(2 * np.pi * z) / np.pi
        assert abs(rgamma_pm2z(z) - expect) < 1e-13 * max(1, abs(expect))


def test_digamma_trigamma():
    assert abs(digamma(1.0) + EULER) < 1e-14
    assert abs(digamma(2.0) - (1 - EULER)) < 1e-14
    assert abs(trigamma(1.0) - math.pi**2 / 6) < 1e-13
    z = 0.4 + 2j
    assert abs(digamma(z + 1) - digamma(z) - 1 / z) < 1e-13


def test_bessel_k_half_integer():
    x = 2.0
    assert abs(bessel_k(0.5, x) - math.sqrt(math.pi / (2 * x)) * math.exp(-x)) < 1e-14


def test_bessel_k0_matches_integral_oracle():
    # int_0^inf exp(-2 cosh t) dt
    assert abs(bessel_k(0.0, 2.0) - 0.11389387274953343565) < 1e-10


def test_bessel_k_even_in_order():
    nu = 0.7 + 0.3j
    assert abs(bessel_k(nu, 1.0) - bessel_k(-nu, 1.0)) < 1e-13


def test_bessel_k_imaginary_order():
    # 2 K_{0.6i}(2 e^{-1/2}) from a 20-digit reference
    assert abs(2 * bessel_k(0.6j, 2 * math.exp(-0.5)) - 0.55852831092551839993) < 1e-11


def test_integrate_circle_examples():
    spec = ContourSpec.circle(rel_tol=1e-13)
    assert abs(integrate_circle(lambda z: 1 / z, spec).value - 1) < 1e-13
    assert abs(integrate_circle(lambda z: z**3, spec).value) < 1e-13
    r = integrate_circle(lambda z: 1 / ((1 - 0.5 * z) * (z - 0.5)), spec).require()
    assert abs(r.value - 4 / 3) < 1e-12


def test_integrate_vertical_gaussian_and_mellin():
    r = integrate_vertical(lambda z: np.exp(z * z), ContourSpec.vertical(0.0, rel_tol=1e-13)).require()
    assert abs(r.value - 1 / (2 * math.sqrt(math.pi))) < 1e-13
    spec = ContourSpec.vertical(1.0, decay_rate=math.pi / 2, rel_tol=1e-12)
    r = integrate_vertical(lambda z: gamma(z), spec, decay_rate=math.pi / 2).require()
    assert abs(r.value - math.exp(-1)) < 1e-11


def test_integrate_vertical_z11_self_refinement():
    def f(z):
        lg = 2 * (log_gamma(1 + z) + log_gamma(1 - z))
        return np.exp(lg + z * z) * rgamma_pm2z(z) / 2

    coarse = integrate_vertical(f, ContourSpec.vertical(0.0, rel_tol=1e-10)).require()
    fine = integrate_vertical(f, ContourSpec.vertical(0.0, rel_tol=1e-14, initial_nodes=160)).require()
    assert abs(coarse.value - fine.value) < 1e-9
    # 20-digit reference of the same integral
    assert abs(fine.value - 1.0113757949841989695) < 1e-12


def test_non_convergence_is_reported():
    spec = ContourSpec.circle(rel_tol=1e-14, max_nodes=16)
    r = integrate_circle(lambda z: np.exp(5 / (z - 1.02)), spec)
    assert not r.converged
    with pytest.raises(NonConvergenceError):
        r.require()


def test_gamma_product_residues():
    u = 0.37
    g = lambda z: np.exp(z) + 2.0  # noqa: E731
    f = [GammaFactor(u, 1)]
    assert abs(gamma_product_residue(f, g, -u) - g(-u)) < 1e-14
    assert abs(gamma_product_residue(f, g, -u - 1) + g(-u - 1)) < 1e-14


def test_gamma_product_near_collision_matches_circle():
    # Ztilde integrand with u = v + 1e-6: the crossed poles of the u and v
    # families sit 1e-6 apart at z = +-0.3
    v = -0.3
    u = v + 1e-6
    # a single residue refuses poles closer than EPS_COLLISION
    with pytest.raises(CollisionError):
        gamma_product_residue([GammaFactor(v + 1e-10, 1), GammaFactor(v, 1)], None, -v - 1e-10)
    factors = [GammaFactor(u, 1), GammaFactor(u, -1), GammaFactor(v, 1), GammaFactor(v, -1),
               GammaFactor(0, 2, "denominator"), GammaFactor(0, -2, "denominator")]
    F = GammaProduct(factors, lambda z: np.exp(z * z) / 2)
    sigma = F.choose_sigma()
    total, terms = F.residue_sum(F.corrections(sigma))
    assert len(terms) == 2
    # oracle: wide circles around each pair
    spec = lambda c: ContourSpec.circle(radius=0.05, center=c, rel_tol=1e-13)  # noqa: E731
    ref = integrate_circle(F, spec(0.3)).require().value - integrate_circle(F, spec(-0.3)).require().value
    assert abs(total - ref) < 1e-6 * abs(ref)
