import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from stripstat.formulas import LaplaceQuery, laplace_lg, partition_geo, partition_lg
from stripstat.params import GeoParams, LGParams, ParameterError
from stripstat.twolayer import (
    DOWN,
    RIGHT,
    ChainConfig,
    GeoDoob,
    LGDoob,
    Q_lg,
    Q_lg_grid,
    h_geo,
    importance_sample_lg,
    kernel_geo,
    kernel_word_step,
    limit_doob,
    limit_kernel,
    pitman_geo,
    pitman_lg,
    q_geo,
    sample_twolayer_geo,
    sample_twolayer_lg_mcmc,
    twolayer_logdensity_geo,
    twolayer_logdensity_lg,
    walk_weight_geo,
    walk_weight_lg,
)
from stripstat.whittaker import psi2

from helpers import chain_vs_density_tv

GEO2 = GeoParams.homogeneous(0.5, 2, 0.3, 0.4)
GEO3 = GeoParams.homogeneous(0.5, 3, 0.3, 0.4)
LG2 = LGParams.homogeneous(1.0, 2, 0.8, 0.8)


# walks and Pitman transforms


def test_pitman_geo_examples():
    z = np.zeros(4, dtype=int)
    o, d = pitman_geo(z, z)
    assert not o.any() and not d.any()
    o, _ = pitman_geo([0, 2, 3], [0, 1, 1])
    assert o[2] == 0


def test_pitman_geo_sum_identity():
    rng = np.random.default_rng(1)
    L1 = np.concatenate([np.zeros((500, 1), int), rng.geometric(0.4, (500, 7)).cumsum(1) - np.arange(1, 8)], 1)
    L2 = np.concatenate([np.zeros((500, 1), int), rng.geometric(0.6, (500, 7)).cumsum(1) - np.arange(1, 8)], 1)
    o, d = pitman_geo(L1, L2)
    assert np.array_equal(L1 + L2, o + d)
    # brute-force min over j
    for n in range(20):
        for k in range(1, 8):
            m = min(L1[n, j - 1] + L2[n, k] - L2[n, j] for j in range(1, k + 1))
            assert o[n, k] == m


def test_pitman_lg_examples():
    z = np.zeros(3)
    p = pitman_lg(z, z)
    assert abs(p[1]) < 1e-15
    assert abs(p[2] + math.log(2)) < 1e-15
    p = pitman_lg([0, 1, 1], [0, 0, 2])
    assert abs(p[2] + math.log(math.exp(-2) + math.exp(-1))) < 1e-14


def test_pitman_lg_zero_temperature_limit():
    # scaling the walks by 1/eps turns log-sum-exp into min
    L1 = np.array([0, 2, 3, 3, 5])
    L2 = np.array([0, 1, 1, 4, 4])
    eps = 1e-3
    o, _ = pitman_geo(L1, L2)
    assert np.allclose(eps * pitman_lg(L1 / eps, L2 / eps), o, atol=1e-2)


def test_walk_weight_geo_mass_n1():
    # L1 x L2 vanishes at N = 1, so the total mass is 1
    k = np.arange(80)
    L1 = np.stack([np.zeros_like(k), k], 1)
    tot = 0.0
    for m in k:
        L2 = np.stack([np.zeros_like(k), np.full_like(k, m)], 1)
        tot += np.exp(walk_weight_geo(L1, L2, GeoParams((0.5,), 0.3, 0.4))).sum()
    assert abs(tot - 1) < 1e-12


def test_walk_weight_geo_mass_n2_matches_partition():
    p = GEO2
    # the reweighted increments decay at least like 0.25^k, so K = 40 is ample
    K = 40
    i2, j1, j2 = np.meshgrid(*(np.arange(K),) * 3, indexing="ij")
    zero = np.zeros_like(i2)
    mass = 0.0
    for i1 in range(K):
        L1 = np.stack([zero, zero + i1, i1 + i2], -1)
        L2 = np.stack([zero, j1, j1 + j2], -1)
        mass += np.exp(walk_weight_geo(L1, L2, p)).sum()
    expect = partition_geo(2, p) * (1 - p.c1 * p.c2) * math.prod((1 - a * p.c1) * (1 - a * p.c2) for a in p.a)
    assert abs(mass / expect - 1) < 1e-10


def test_walk_weight_geo_rejects_c1c2_zero():
    with pytest.raises(ParameterError):
        walk_weight_geo([0, 1], [0, 0], GeoParams((0.5,), 0.0, 0.4))


def test_walk_weight_lg_zero_paths():
    p = LGParams.homogeneous(1.3, 3, 0.4, 0.9)
    z = np.zeros(4)
    N = 3
    expect = N * (-special.gammaln(1.3 + 0.9) - 1) + N * (-special.gammaln(1.3 + 0.4) - 1)
    expect += (0.4 + 0.9) * (-math.log(N))
    assert abs(walk_weight_lg(z, z, p) - expect) < 1e-13


# two-layer densities


def test_geo_density_examples():
    p = GeoParams((0.5,), 0.3, 0.4)
    assert abs(twolayer_logdensity_geo([[3, 0]], p) - 3 * math.log(0.12)) < 1e-14
    assert abs(twolayer_logdensity_geo([[0, 0], [1, 0]], p) - math.log(0.4 * 0.5)) < 1e-14
    # non-interlacing
    assert twolayer_logdensity_geo([[2, 0], [1, 0]], p) == -math.inf
    with pytest.raises(ParameterError):
        twolayer_logdensity_geo([[2, 1], [3, 1]], p)


def test_geo_density_down_letter():
    p = GeoParams((0.5,), 0.3, 0.4)
    up = twolayer_logdensity_geo([[2, 0], [3, 1]], p, [RIGHT])
    down = twolayer_logdensity_geo([[3, 0], [2, -1]], p, [DOWN])
    assert np.isfinite(up) and np.isfinite(down)


def test_lg_density_zero_path():
    p = LGParams((1.0,), 0.8, 0.8)
    assert abs(twolayer_logdensity_lg(np.zeros((2, 2)), p) + 3) < 1e-15


# Doob functions


def test_q0_is_geometric():
    for l in range(5):
        assert abs(q_geo(0, l, GEO2) - 0.4**l) < 1e-12
    assert abs(q_geo(0, 2, GEO2) - 0.16) < 1e-10


def test_q_geo_fft_matches_contour():
    d = GeoDoob(GEO3)
    for M in range(4):
        for l in (0, 3, 7):
            assert abs(d.q(M, l) - q_geo(M, l, GEO3)) < 1e-12


def test_doob_normalizer():
    d = GeoDoob(GEO2)
    tot = sum(0.3**l * d.q(2, l) for l in range(200))
    assert abs(tot - 0.5**4 * partition_geo(2, GEO2)) < 1e-12
    assert abs(tot - d.denominator) < 1e-12


def test_q_lg_base_case():
    for l in (-1.0, 0.0, 2.5):
        assert abs(Q_lg(0, l, LG2) - math.exp(-0.8 * l)) < 1e-10 * math.exp(-0.8 * l)


def test_q_lg_integral_matches_partition():
    # Gauss-Legendre panels in l; outside [-6, 24] the integrand is below 1e-14
    xg, wg = np.polynomial.legendre.leggauss(16)
    val = 0.0
    for a, b in ((-6, 0), (0, 6), (6, 24)):
        ls = (a + b) / 2 + (b - a) / 2 * xg
        val += (b - a) / 2 * np.sum(wg * np.exp(-0.8 * ls) * Q_lg_grid(2, ls, LG2))
    assert abs(val - partition_lg(2, LG2)) < 1e-6 * val
    assert abs(LGDoob(LG2).denominator - partition_lg(2, LG2)) < 1e-10 * val


def test_q_lg_self_refinement_and_grid():
    a = Q_lg(1, 0.0, LG2, rel_tol=1e-9)
    b = Q_lg(1, 0.0, LG2, rel_tol=1e-12)
    assert abs(a - b) < 1e-9 * abs(b)
    ls = np.array([-5.0, -1.0, 0.0, 1.5, 20.0])
    g = Q_lg_grid(2, ls, LG2)
    assert np.allclose(g, [Q_lg(2, l, LG2) for l in ls], rtol=1e-9)


def test_q_lg_shape_approaches_bessel():
    p = LGParams.homogeneous(1.0, 60, 0.8, 0.8)
    for l in (1.0, 2.0):
        r = Q_lg(60, l, p) / Q_lg(60, 0.0, p)
        s = (psi2(0, 0, l, 0) / psi2(0, 0, 0, 0)).real
        assert abs(r / s - 1) < 0.03


# kernels


@pytest.mark.parametrize("x", [0, 1, 2])
def test_geo_kernel_rows_sum_to_one(x):
    lam = (1, 0)
    tot = sum(kernel_geo(x, x + 1, lam, (m1, m2), GEO3) for m2 in range(0, 2) for m1 in range(1, 60))
    assert abs(tot - 1) < 1e-10


def test_geo_kernel_semigroup():
    for lam, mu in [((2, 1), (4, 1)), ((1, 0), (3, 2)), ((0, 0), (3, 0))]:
        comp = sum(kernel_geo(0, 1, lam, (k1, k2), GEO3) * kernel_geo(1, 2, (k1, k2), mu, GEO3)
                   for k1 in range(lam[0], mu[0] + 1) for k2 in range(lam[1], lam[0] + 1))
        assert abs(comp / kernel_geo(0, 2, lam, mu, GEO3) - 1) < 1e-9


def test_chain_marginals_small_box():
    assert chain_vs_density_tv(GeoParams.homogeneous(0.2, 2, 0.2, 0.3), 12) < 1e-6


def test_word_step_right_is_kernel():
    lam, mu = (1, 0), (3, 1)
    for x in (1, 2, 3):
        assert kernel_word_step(x, RIGHT, lam, mu, GEO3, "geo") == kernel_geo(x - 1, x, lam, mu, GEO3)


def test_word_step_down_rows():
    lam = (3, 1)
    for x in (1, 2, 3):
        tot = sum(kernel_word_step(x, DOWN, lam, (m1, m2), GEO3, "geo")
                  for m1 in range(1, 4) for m2 in range(-60, 2))
        assert abs(tot - 1) < 1e-10


def test_down_then_right_positive():
    v = kernel_word_step(1, DOWN, (3, 1), (2, 0), GEO3, "geo") * kernel_word_step(2, RIGHT, (2, 0), (4, 1), GEO3, "geo")
    assert v > 0 and np.isfinite(v)


# samplers


def test_geo_sampler_invariants_and_seed():
    s = sample_twolayer_geo(GEO3, 5, 2000)
    assert s.shape == (2000, 4, 2)
    assert (s[:, 0, 1] == 0).all()
    lam, mu = s[:, :-1], s[:, 1:]
    assert (mu[..., 0] >= lam[..., 0]).all() and (lam[..., 0] >= mu[..., 1]).all()
    assert (mu[..., 1] >= lam[..., 1]).all()
    assert np.array_equal(s, sample_twolayer_geo(GEO3, 5, 2000))


def test_geo_sampler_matches_density_n1():
    p = GeoParams((0.5,), 0.3, 0.4)
    K = 60
    law = np.zeros(K + 1)
    for m in range(K + 1):
        for a1 in range(m, K + 1):
            for a2 in range(0, m + 1):
                law[a1 - m] += math.exp(twolayer_logdensity_geo([(m, 0), (a1, a2)], p))
    law /= law.sum()
    s = sample_twolayer_geo(p, 11, 100_000)
    d = s[:, 1, 0] - s[:, 0, 0]
    counts = np.bincount(d, minlength=K + 1)[: K + 1]
    exp = law * len(d)
    cut = int(np.nonzero(exp >= 10)[0].max())
    obs = np.append(counts[:cut], counts[cut:].sum())
    ex = np.append(exp[:cut], exp[cut:].sum())
    assert stats.chisquare(obs, ex * obs.sum() / ex.sum()).pvalue > 0.01


def test_lg_mcmc_acceptance():
    p = LGParams.homogeneous(1.0, 4, 0.7, 0.7)
    res = sample_twolayer_lg_mcmc(p, 3, ChainConfig(n_chains=16, burn_in=3000, n_samples=200, thin=5))
    assert 0.1 <= res.acceptance <= 0.6
    assert res.paths.shape[-2:] == (5, 2)


def test_lg_importance_sampling_matches_formula():
    t = 0.2
    res = importance_sample_lg(LG2, 7, 200_000)
    est = res.estimate(lambda L1, L2: np.exp(-2 * t * L1[..., -1]))
    ref = laplace_lg(LaplaceQuery.single("LG", 2, t), LG2)
    assert res.ess > 1e4
    assert abs(est.mean - ref) < 3 * est.stderr


# limits


def test_limit_doob_geo():
    p = GeoParams.homogeneous(0.5, 200, 0.3, 0.4)
    assert abs(limit_doob("geo", 0, p) - 0.49) < 1e-15
    for l in range(6):
        assert abs(h_geo(0, 200, l, p) / limit_doob("geo", l, p) - 1) < 0.02


def test_limit_kernel_rows():
    p = GeoParams.homogeneous(0.5, 1, 0.3, 0.4)
    tot = sum(limit_kernel("geo", (2, 0), (m1, m2), p) for m1 in range(2, 100) for m2 in range(0, 3))
    assert abs(tot - 1) < 1e-10


def test_limit_doob_lg_formula():
    p = LGParams.homogeneous(1.0, 1, 0.8, 0.8)
    for l in (0.0, 1.0):
        expect = 2 * special.k0(2 * math.exp(-l / 2)) / special.gamma(0.8) ** 2
        assert abs(limit_doob("lg", l, p) - expect) < 1e-12 * expect


def test_model_dispatch_checks_types():
    with pytest.raises(TypeError):
        limit_doob("geo", 0, LG2)
    with pytest.raises(ValueError):
        limit_doob("xyz", 0, LG2)
