import math

import numpy as np
import pytest
from scipy import integrate, special

from stripstat.whittaker import (
    baxter_kernel,
    log_baxter,
    psi2,
    psi_givental,
    skew_whittaker,
    verify_baxter_eigen,
    verify_cauchy_whittaker,
    verify_grsk_sum,
    verify_littlewood_whittaker,
    verify_mellin_n1,
)

TWO_K0_2 = 0.22778774549906687131  # 2 K_0(2), 20 digits


def test_psi2_bessel_values():
    assert abs(psi2(0, 0, 0.0, 0.0) - TWO_K0_2) < 1e-13
    for l in (-1.0, 2.0):
        assert abs(psi2(0, 0, l, 0.0) - 2 * special.k0(2 * math.exp(-l / 2))) < 1e-12


def test_psi2_symmetric():
    z1, z2 = 0.3 + 0.2j, -0.1 + 0.4j
    assert abs(psi2(z1, z2, 0.4, -0.2) - psi2(z2, z1, 0.4, -0.2)) < 1e-13


def test_psi2_imaginary_order_matches_givental():
    z = 0.3j
    target = 0.55852831092551839993  # 2 K_{0.6i}(2 e^{-1/2})
    assert abs(psi2(z, -z, 1.0, 0.0) - target) < 1e-11
    g = psi_givental([z, -z], [1.0, 0.0], rel_tol=1e-12)
    assert abs(g - target) < 1e-8


def test_baxter_kernel_origin():
    assert abs(baxter_kernel(1.0, (0, 0), (0, 0)) - math.exp(-3)) < 1e-15


def test_baxter_kernel_decay_in_x1():
    # away from y the dominant term is e^{-alpha x1}
    a = 0.7
    y = (0.0, -1.0)
    r = baxter_kernel(a, (15.0, -0.5), y) / baxter_kernel(a, (5.0, -0.5), y)
    assert abs(r / math.exp(-10 * a) - 1) < 1e-2


def test_baxter_kernel_superexponential_in_x2():
    # x2 above y1 is penalized by e^{-e^{x2-y1}}
    y = (0.0, -1.0)
    assert baxter_kernel(1.0, (5.0, 3.0), y) < 1e-8


def test_baxter_eigenrelation():
    chk = verify_baxter_eigen(2.0, (0.2j, -0.2j), (0.5, -0.5), rel_tol=1e-9)
    assert abs(chk.rhs - 0.57994100735835631329) < 1e-11
    assert chk.passed(1e-6)


def test_givental_n1():
    assert abs(psi_givental([0.7], [1.3]) - math.exp(-0.91)) < 1e-15


def test_givental_n2_matches_bessel_and_is_symmetric():
    z, x = (0.4, 0.1), (0.3, -0.3)
    g = psi_givental(list(z), list(x), rel_tol=1e-12)
    assert abs(g - psi2(*z, *x)) < 1e-8 * abs(psi2(*z, *x))
    g2 = psi_givental(list(z[::-1]), list(x), rel_tol=1e-12)
    assert abs(g - g2) < 1e-8 * abs(g)


def test_givental_n3_symmetric():
    x = (0.5, 0.0, -0.4)
    a = psi_givental([0.3, 0.6, 0.9], x)
    b = psi_givental([0.9, 0.3, 0.6], x)
    assert abs(a - b) < 1e-5 * abs(a)


def test_skew_whittaker_k1_is_baxter():
    x, y = (0.4, -0.3), (0.1, -0.5)
    assert skew_whittaker([1.3], x, y) == baxter_kernel(1.3, x, y)


def test_skew_whittaker_k2_against_scipy():
    x = y = (0.3, -0.2)
    a = 1.1
    val = skew_whittaker([a, a], x, y, rel_tol=1e-10)

    def f(w2, w1):
        return math.exp(log_baxter(a, x[0], x[1], w1, w2) + log_baxter(a, w1, w2, y[0], y[1]))

    ref, err = integrate.dblquad(f, -12, 12, -14, 12, epsabs=1e-13, epsrel=1e-10)
    assert abs(val - ref) < 1e-6 * ref


def test_cauchy_whittaker():
    c = verify_cauchy_whittaker(1, [1.0], [1.0])
    assert abs(c.lhs - 1) < 1e-12 and c.passed(1e-10)
    c = verify_cauchy_whittaker(2, [0.8, 1.2], [0.9, 1.1], rel_tol=1e-9)
    assert abs(c.rhs - 1.066983192592968404) < 1e-13
    assert c.passed(1e-6)
    d = verify_cauchy_whittaker(2, [0.9, 1.1], [0.8, 1.2], rel_tol=1e-9)
    assert d.rhs == pytest.approx(c.rhs, rel=1e-14)
    assert abs(d.lhs - c.lhs) < 1e-6 * abs(c.rhs)


def test_littlewood_whittaker():
    c = verify_littlewood_whittaker([1.0, 1.5], 0.5, 1.0, rel_tol=1e-9)
    assert c.passed(1e-6)
    s = verify_littlewood_whittaker([1.0, 1.5], 0.5, 2.0, rel_tol=1e-9)
    assert abs(s.lhs / c.lhs - 2.0 ** (-2.5)) < 1e-6
    up = verify_littlewood_whittaker([1.0, 1.5], 1.5, 1.0, rel_tol=1e-9)
    assert abs(up.rhs / c.rhs - 1.5 * 2.0) < 1e-12


def test_grsk_sum():
    al, be = [0.8, 1.1], [0.7, 1.3]
    c = verify_grsk_sum(al, be, 0.4, 1.0, rel_tol=1e-9)
    assert c.passed(1e-6)
    z = verify_grsk_sum(al, be, 0.0, 1.0, rel_tol=1e-9)
    ref = np.prod([special.gamma(a + b) for a in al for b in be])
    assert abs(z.rhs - ref) < 1e-12 * ref
    s = verify_grsk_sum(al, be, 0.4, 3.0, rel_tol=1e-9)
    assert abs(s.lhs / c.lhs - 3.0 ** -sum(al + be)) < 1e-6


def test_mellin_n1():
    c = verify_mellin_n1(1.0, 0.0)
    assert abs(c.lhs - math.exp(-1)) < 1e-12
    c = verify_mellin_n1(2.5, math.log(0.7))
    assert abs(c.rhs - 0.58456688777928529552) < 1e-13
    assert c.passed(1e-9)
    d = verify_mellin_n1(2.5, math.log(0.7), eta=0.3)
    assert abs(d.lhs - c.lhs) < 1e-10
