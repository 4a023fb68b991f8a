import itertools
import math

import numpy as np
import pytest

from stripstat.formulas import LaplaceQuery
from stripstat.params import GeoParams, LGParams, ParameterError
from stripstat.strip_models import (
    StripWeights,
    brute_force_laplace_geo,
    lpp_evolve,
    polymer_evolve,
    sample_strip_weights,
    stationarity_report,
)


def test_zero_boundary_parameter_gives_zero_edge_weights():
    p = GeoParams.homogeneous(0.0, 3, 0.0, 0.5)
    w = sample_strip_weights("GEO", p, 50, seed=1)
    assert np.all(w.band[:, 0] == 0)
    assert w.weight(5, 5) == 0


def test_weight_indexing():
    band = np.arange(12).reshape(4, 3)
    w = StripWeights("GEO", 2, band)
    assert w.weight(1, 1) == 0 and w.weight(3, 1) == 2 and w.weight(6, 4) == 11
    with pytest.raises(IndexError):
        w.weight(4, 1)


def test_geo_bulk_mean():
    a = 0.6
    w = sample_strip_weights("GEO", GeoParams.homogeneous(a, 2, 0.3, 0.4), 100_000, seed=7)
    x = w.band[:, 1]
    se = x.std(ddof=1) / math.sqrt(x.size)
    assert abs(x.mean() - a * a / (1 - a * a)) < 3 * se
    edge = w.band[:, 2]
    se = edge.std(ddof=1) / math.sqrt(edge.size)
    assert abs(edge.mean() - 0.24 / 0.76) < 3 * se


def test_lg_bulk_mean_of_inverse_weight():
    al = 1.3
    w = sample_strip_weights("LG", LGParams.homogeneous(al, 2, 0.5, 0.7), 100_000, seed=8)
    x = 1 / w.band[:, 1]
    se = x.std(ddof=1) / math.sqrt(x.size)
    assert abs(x.mean() - 2 * al) < 3 * se


def test_zero_weights_leave_profile_unchanged():
    N = 3
    w = StripWeights("GEO", N, np.zeros((5, N + 1), dtype=np.int64))
    res = lpp_evolve(np.zeros(N + 1, dtype=np.int64), w)
    assert not res.profile.any() and res.anchor == 0
    # the recursion is a max of shifted copies, so a flat profile is a fixed point
    res = lpp_evolve(np.zeros((2, N + 1), dtype=np.int64), w, m=3)
    assert not res.profile.any() and not res.anchor.any()


def test_lpp_one_row_by_hand():
    # N = 2, boundary G(0,0)=0, G(1,0)=2, G(2,0)=1
    w = StripWeights("GEO", 2, np.array([[3, 1, 5]]))
    res = lpp_evolve(np.array([0, 2, 1]), w)
    g11 = 3 + 2  # from (1,0)
    g21 = 1 + max(g11, 1)  # from (1,1) or (2,0)
    g31 = 5 + g21  # only from (2,1)
    assert res.anchor == g11
    assert list(res.profile) == [0, g21 - g11, g31 - g11]


def test_lpp_n1_by_hand():
    w = StripWeights("GEO", 1, np.array([[2, 4]]))
    res = lpp_evolve(np.array([0, 7]), w)
    assert res.anchor == 9 and list(res.profile) == [0, 4]


def _count_paths(i, j, N):
    """Up-right paths that leave row 0 at some (k, 0) and reach (i, j) inside the strip."""
    count = 0
    for k in range(N + 1):
        n_right = i - k
        if n_right < 0:
            continue
        # after the first up-step from (k, 0), place the remaining j - 1 up-steps
        steps = n_right + j - 1
        for ups in itertools.combinations(range(steps), j - 1):
            x, y = k, 1
            ok = y <= x <= y + N
            for s in range(steps):
                if s in ups:
                    y += 1
                else:
                    x += 1
                ok = ok and y <= x <= y + N
            count += ok
    return count


def test_polymer_unit_weights_count_paths():
    N, m = 2, 2
    w = StripWeights("LG", N, np.ones((m, N + 1)))
    res = polymer_evolve(np.zeros(N + 1), w)
    counts = [_count_paths(m + d, m, N) for d in range(N + 1)]
    assert res.anchor == pytest.approx(math.log(counts[0]), abs=1e-14)
    assert np.allclose(res.profile, np.log(np.array(counts) / counts[0]), atol=1e-14)


def test_path_count_helper():
    # (1,1) is entered only from (1,0); (2,1) from (1,1) or (2,0)
    assert _count_paths(1, 1, 2) == 1
    assert _count_paths(2, 1, 2) == 2
    assert _count_paths(3, 1, 2) == 2
    assert _count_paths(2, 2, 2) == 2


def test_evolve_rejects_bad_input():
    w = sample_strip_weights("GEO", GeoParams.homogeneous(0.5, 2, 0.3, 0.3), 2, seed=0)
    with pytest.raises(ValueError):
        lpp_evolve(np.array([1, 0, 0]), w)
    with pytest.raises(ValueError):
        polymer_evolve(np.zeros(3), w)
    with pytest.raises(ParameterError):
        sample_strip_weights("LG", GeoParams.homogeneous(0.5, 2, 0.3, 0.3), 2, seed=0)


def test_batched_evolution_matches_single():
    p = GeoParams.homogeneous(0.5, 3, 0.4, 0.6)
    w = sample_strip_weights("GEO", p, 4, seed=3, replicas=5)
    prof = np.zeros((5, 4), dtype=np.int64)
    batch = lpp_evolve(prof, w)
    for r in range(5):
        one = lpp_evolve(prof[r], StripWeights("GEO", 3, w.band[r]))
        assert np.array_equal(one.profile, batch.profile[r]) and one.anchor == batch.anchor[r]


def test_geo_stationarity():
    rep = stationarity_report("GEO", GeoParams.homogeneous(0.5, 2, 0.4, 0.6), 3, 20_000, seed=11)
    assert rep["passed"]
    assert all(c["p_value"] > 0.01 for c in rep["coordinates"])


def test_geo_negative_control_rejected():
    rep = stationarity_report("GEO", GeoParams.homogeneous(0.5, 2, 0.4, 0.6), 3, 20_000, seed=11,
                              negative_control=True)
    assert rep["min_p_value"] < 1e-3 and not rep["passed"]


def test_zero_rows_is_trivially_stationary():
    rep = stationarity_report("GEO", GeoParams.homogeneous(0.5, 2, 0.4, 0.6), 0, 1000, seed=2)
    assert rep["min_p_value"] == 1.0


def test_lg_stationarity_n1():
    rep = stationarity_report("LG", LGParams.homogeneous(1.0, 1, 0.7, 0.9), 3, 20_000, seed=5)
    assert rep["passed"]


def test_brute_force_trivial_t():
    p = GeoParams.homogeneous(0.5, 2, 0.4, 0.6)
    r = brute_force_laplace_geo(p, LaplaceQuery.single("GEO", 2, 1.0))
    assert abs(r.value - 1) <= r.tail_bound + 1e-14


def test_brute_force_n1_closed_form():
    a, c1, c2, t = 0.5, 0.4, 0.6, 1.1
    p = GeoParams.homogeneous(a, 1, c1, c2)
    r = brute_force_laplace_geo(p, LaplaceQuery.single("GEO", 1, t), target=1e-12)
    exact = (1 - a * c2) / (1 - a * c2 * t * t)
    assert abs(r.value - exact) <= r.tail_bound + 1e-13
    assert r.tail_bound <= 1e-12


def test_brute_force_monotone_in_t():
    p = GeoParams.homogeneous(0.5, 2, 0.4, 0.6)
    vals = [brute_force_laplace_geo(p, LaplaceQuery.single("GEO", 2, t)).value for t in (0.6, 0.9, 1.0, 1.1)]
    assert all(x < y for x, y in zip(vals, vals[1:]))


def test_brute_force_tail_bound_is_honest():
    p = GeoParams.homogeneous(0.5, 2, 0.4, 0.6)
    q = LaplaceQuery.single("GEO", 2, 1.2)
    coarse = brute_force_laplace_geo(p, q, cutoff=15)
    fine = brute_force_laplace_geo(p, q, target=1e-12)
    assert abs(coarse.value - fine.value) <= coarse.tail_bound + fine.tail_bound
