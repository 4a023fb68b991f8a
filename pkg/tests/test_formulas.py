import math

import numpy as np
import pytest

from stripstat.formulas import (
    LaplaceQuery,
    laplace_geo,
    laplace_lg,
    laplace_lg_continued,
    mean_free_energy,
    partition_geo,
    partition_geo_residues,
    partition_lg,
)
from stripstat.params import GeoParams, LGParams, ParameterError
from stripstat.strip_models import brute_force_laplace_geo, mean_h11_lg
from stripstat.suites import z_geo_closed_form
from stripstat.twolayer.geo import sample_twolayer_geo
from stripstat.twolayer.lg import ChainConfig, importance_sample_lg, sample_twolayer_lg_mcmc

GEO = GeoParams((0.5, 0.6), 0.3, 0.4)
LG = LGParams.homogeneous(1.0, 2, 0.8, 0.8)


def test_partition_geo_small_n():
    assert abs(partition_geo(0, GEO) * 0.88 - 1) < 1e-12
    assert abs(partition_geo(1, GEO) * 0.88 * 0.85 * 0.80 - 1) < 1e-12


def test_partition_geo_two_columns_closed_form():
    a1, a2, c1, c2 = 0.5, 0.6, 0.3, 0.4
    ref = (1 - a1 * a2 * c1 * c2) / (
        (1 - c1 * c2) * (1 - a1 * c1) * (1 - a1 * c2) * (1 - a2 * c1) * (1 - a2 * c2) * (1 - a1 * a2))
    assert abs(z_geo_closed_form(2, (a1, a2), c1, c2) - ref) < 1e-15
    assert abs(partition_geo(2, GEO) / ref - 1) < 1e-10


@pytest.mark.parametrize("N", [0, 1, 2])
def test_partition_geo_residues_agree(N):
    assert abs(partition_geo_residues(N, GEO) / partition_geo(N, GEO) - 1) < 1e-10


def test_partition_geo_rejects_continuation():
    with pytest.raises(ParameterError):
        laplace_geo(LaplaceQuery.single("GEO", 1, 1.0), GeoParams((0.5,), 1.2, 0.4))


def test_partition_lg_positive():
    assert partition_lg(2, LG) > 0
    # the continued normalization stays positive past u = 0
    assert partition_lg(2, LGParams.homogeneous(1.0, 2, -0.2, 1.0)) > 0


def test_laplace_geo_normalized():
    assert abs(laplace_geo(LaplaceQuery.single("GEO", 2, 1.0), GEO) - 1) < 1e-9
    # the multipoint integrand needs strictly increasing t
    with pytest.raises(ParameterError):
        laplace_geo(LaplaceQuery("GEO", (0, 1, 2), (1.0, 1.0)), GEO)


def test_laplace_geo_matches_enumeration():
    p = GeoParams.homogeneous(0.5, 2, 0.3, 0.4)
    q = LaplaceQuery.single("GEO", 2, 1.2)
    ref = brute_force_laplace_geo(p, q)
    assert abs(laplace_geo(q, p) - ref.value) <= ref.tail_bound + 1e-11
    assert ref.value >= 1


def test_laplace_geo_derivative_is_mean_increment():
    # d/dt E[t^{2 L1(N)}] at t = 1 is 2 E[L1(N)]
    p = GeoParams.homogeneous(0.5, 2, 0.3, 0.4)
    h = 1e-4

    def f(t):
        return laplace_geo(LaplaceQuery.single("GEO", 2, t), p)

    def g(t):
        return brute_force_laplace_geo(p, LaplaceQuery.single("GEO", 2, t), target=1e-13).value

    d_formula = (f(1 + h) - f(1 - h)) / (2 * h)
    d_enum = (g(1 + h) - g(1 - h)) / (2 * h)
    assert abs(d_formula - d_enum) < 1e-5


def test_laplace_geo_two_points_against_sampler():
    p = GeoParams.homogeneous(0.5, 2, 0.3, 0.4)
    q = LaplaceQuery("GEO", (0, 1, 2), (1.1, 1.2))
    paths = sample_twolayer_geo(p, 1, 200_000)
    L1 = paths[:, :, 0] - paths[:, :1, 0]
    f = 1.1 ** (2 * L1[:, 1]) * 1.2 ** (2 * (L1[:, 2] - L1[:, 1]))
    se = f.std(ddof=1) / math.sqrt(f.size)
    assert abs(laplace_geo(q, p) - f.mean()) < 3 * se


def test_laplace_lg_normalized():
    assert abs(laplace_lg(LaplaceQuery.single("LG", 2, 0.0), LG) - 1) < 1e-8


def test_laplace_lg_against_importance_sampling():
    v = laplace_lg(LaplaceQuery.single("LG", 2, 0.3), LG)
    est = importance_sample_lg(LG, 3, 200_000).estimate(lambda L1, L2: np.exp(-0.6 * L1[:, -1]))
    assert est.ess > 1e4
    assert est.within(v)


def test_laplace_lg_layer_reflection():
    # swapping u and v exchanges the roles of the two layers at the same t
    t = 0.2
    v = laplace_lg(LaplaceQuery.single("LG", 2, t), LGParams.homogeneous(1.0, 2, 0.5, 0.9))
    est = importance_sample_lg(LGParams.homogeneous(1.0, 2, 0.9, 0.5), 3, 400_000).estimate(
        lambda L1, L2: np.exp(-2 * t * L2[:, -1]))
    assert est.within(v)


def test_laplace_lg_two_points_against_importance_sampling():
    q = LaplaceQuery("LG", (0, 1, 2), (0.3, 0.1))
    est = importance_sample_lg(LG, 6, 200_000).estimate(
        lambda L1, L2: np.exp(-2 * (0.3 * L1[:, 1] + 0.1 * (L1[:, 2] - L1[:, 1]))))
    assert est.within(laplace_lg(q, LG))


def test_continued_reduces_to_direct():
    direct = laplace_lg(LaplaceQuery.single("LG", 2, 0.3), LG)
    assert abs(laplace_lg_continued(2, 0.3, LG) - direct) < 1e-10
    via_query = laplace_lg(LaplaceQuery.single("LG", 2, 0.3, continuation=True), LG)
    assert via_query == laplace_lg_continued(2, 0.3, LG)


def test_continued_is_continuous_across_pole_crossing():
    t = 0.3
    left = laplace_lg_continued(2, t, LGParams.homogeneous(1.0, 2, t - 1e-8, 0.8))
    right = laplace_lg_continued(2, t, LGParams.homogeneous(1.0, 2, t + 1e-8, 0.8))
    assert abs(left - right) < 1e-7


def test_continued_against_mcmc():
    p = LGParams.homogeneous(1.0, 2, -0.2, 1.0)
    t = 0.5
    v = laplace_lg_continued(2, t, p)
    res = sample_twolayer_lg_mcmc(p, 4, ChainConfig(n_chains=64, n_samples=2000, thin=10))
    est = res.estimate(lambda P: np.exp(-2 * t * (P[..., -1, 0] - P[..., 0, 0])))
    assert est.within(v)


def test_continued_rejects_bad_t():
    with pytest.raises(ParameterError):
        laplace_lg_continued(2, -0.6, LGParams.homogeneous(1.0, 2, -0.2, 1.0))


def test_mean_free_energy_linear_and_symmetric():
    p = LGParams.homogeneous(1.0, 2, 0.5, 0.9)
    f2 = mean_free_energy(2, p)
    assert abs(mean_free_energy(4, p) - 2 * f2) < 1e-12 * abs(f2)
    assert abs(mean_free_energy(2, LGParams.homogeneous(1.0, 2, 0.9, 0.5)) - f2) < 1e-12 * abs(f2)
    with pytest.raises(ParameterError):
        mean_free_energy(3, p)


def test_mean_free_energy_against_simulation():
    p = LGParams.homogeneous(1.0, 1, 1.0, 1.0)
    est = mean_h11_lg(p, 100_000, 5)
    assert est.within(mean_free_energy(1, p))
