"""Geometric LPP and the log-gamma polymer on a strip of width N.

Cells are (i, j) with j <= i <= j + N; row j holds the N + 1 cells with offsets
d = i - j in 0..N.  Offset 0 is the left (diagonal) boundary, offset N the
right boundary.  Weight arrays have shape (..., rows, N + 1).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from .mc import McEstimate, mean_estimate
from .params import GeoParams, LGParams, ParameterError
from .twolayer.geo import sample_twolayer_geo
from .twolayer.lg import ChainConfig, sample_twolayer_lg_mcmc

__all__ = [
    "McEstimate",
    "StripWeights",
    "EvolveResult",
    "sample_strip_weights",
    "lpp_evolve",
    "polymer_evolve",
    "initial_profiles",
    "stationarity_report",
    "BruteForceResult",
    "brute_force_laplace_geo",
    "mean_h11_lg",
]


@dataclass
class StripWeights:
    model: str
    N: int
    band: np.ndarray  # geo: integer counts; LG: positive weights omega

    @property
    def rows(self) -> int:
        return self.band.shape[-2]

    def weight(self, i: int, j: int):
        """w_{i,j} for 1 <= j <= rows, j <= i <= j + N."""
        d = i - j
        if not (1 <= j <= self.rows and 0 <= d <= self.N):
            raise IndexError(f"cell ({i}, {j}) is outside the strip")
        return self.band[..., j - 1, d]


@dataclass
class EvolveResult:
    profile: np.ndarray  # G_m(i) = G(m+i, m) - G(m, m), i = 0..N
    anchor: np.ndarray  # G(m, m)


def _model(model, params):
    m = str(model).upper()
    if m == "GEO" and isinstance(params, GeoParams):
        return m
    if m == "LG" and isinstance(params, LGParams):
        return m
    raise ParameterError(f"model {model!r} does not match {type(params).__name__}")


def sample_strip_weights(model, params, rows: int, seed, replicas: int | None = None) -> StripWeights:
    """Independent strip weights.

    GEO: bulk Geom(a^2), left diagonal Geom(a c1), right edge Geom(a c2), where
    Geom(q) puts mass (1-q) q^k on k >= 0.  LG: inverse-Gamma with shapes 2 alpha,
    alpha + u and alpha + v.
    """
    model = _model(model, params)
    if not params.is_homogeneous:
        raise ParameterError("strip simulation needs homogeneous bulk parameters")
    N = params.N
    if rows < 0:
        raise ValueError("rows must be nonnegative")
    shape = ((replicas,) if replicas else ()) + (rows, N + 1)
    rng = np.random.default_rng(seed)
    if model == "GEO":
        a = params.a[0]
        q = np.full(N + 1, a * a)
        q[0] = a * params.c1
        q[N] = a * params.c2
        band = rng.geometric(1.0 - q, size=shape) - 1
    else:
        al = params.alphas[0]
        th = np.full(N + 1, 2 * al)
        th[0] = al + params.u
        th[N] = al + params.v
        band = 1.0 / rng.gamma(th, size=shape)
    return StripWeights(model, N, band)


def _check_profile(profile, weights: StripWeights):
    profile = np.asarray(profile)
    if profile.shape[-1] != weights.N + 1:
        raise ValueError("profile length must be N + 1")
    if np.any(profile[..., 0] != 0):
        raise ValueError("profiles are anchored: value(0) = 0")
    return profile


def _evolve(profile, values, N, m, combine):
    prev = profile
    anchor = np.zeros(prev.shape[:-1], dtype=prev.dtype)
    for r in range(m):
        w = values[..., r, :]
        row = np.empty_like(prev)
        # (j, j) has only the predecessor (j, j-1)
        row[..., 0] = w[..., 0] + prev[..., 1]
        for d in range(1, N + 1):
            if d < N:
                row[..., d] = w[..., d] + combine(row[..., d - 1], prev[..., d + 1])
            else:
                # (j+N, j) has only the predecessor (j+N-1, j)
                row[..., d] = w[..., d] + row[..., d - 1]
        anchor = anchor + row[..., 0]
        prev = row - row[..., :1]
    return EvolveResult(prev, anchor)


def _rows(weights, m):
    m = weights.rows if m is None else m
    if not 0 <= m <= weights.rows:
        raise ValueError(f"m must lie in 0..{weights.rows}")
    return m


def lpp_evolve(profile, weights: StripWeights, m: int | None = None) -> EvolveResult:
    """Last-passage recursion G(i,j) = w + max(G(i-1,j), G(i,j-1)) over m rows.

    The row-0 boundary is the profile G_0; admissible predecessors are those
    inside the strip.  The result is recentered at G(m, m) (the anchor).
    """
    if weights.model != "GEO":
        raise ValueError("lpp_evolve needs geometric weights")
    profile = _check_profile(profile, weights).astype(np.int64)
    if weights.N < 1:
        raise ValueError("need N >= 1")
    band = np.broadcast_to(weights.band, profile.shape[:-1] + weights.band.shape[-2:])
    return _evolve(profile, band, weights.N, _rows(weights, m), np.maximum)


def polymer_evolve(profile, weights: StripWeights, m: int | None = None) -> EvolveResult:
    """Log-partition recursion H(i,j) = log w + logaddexp(H(i-1,j), H(i,j-1))."""
    if weights.model != "LG":
        raise ValueError("polymer_evolve needs log-gamma weights")
    profile = _check_profile(profile, weights).astype(float)
    if weights.N < 1:
        raise ValueError("need N >= 1")
    logw = np.log(np.broadcast_to(weights.band, profile.shape[:-1] + weights.band.shape[-2:]))
    return _evolve(profile, logw, weights.N, _rows(weights, m), np.logaddexp)


# ---------------------------------------------------------------------------
# stationarity harness
# ---------------------------------------------------------------------------


def initial_profiles(model, params, samples: int, seed, chain_config: ChainConfig | None = None):
    """Stationary initial profiles lambda_1^x - lambda_1^0, x = 0..N.

    GEO uses the exact sampler; LG thinned MCMC chains (the result carries the
    chain diagnostics), except at N = 1 where the law is an explicit log-gamma
    increment.
    """
    model = _model(model, params)
    if model == "GEO":
        paths = sample_twolayer_geo(params, seed, samples)
        return paths[:, :, 0] - paths[:, :1, 0], None
    if params.N == 1:
        # (L1 (x) L2)(1) = 0, so L1(1) is a single reference increment
        rng = np.random.default_rng(seed)
        prof = np.zeros((samples, 2))
        prof[:, 1] = -np.log(rng.gamma(params.alphas[0] + params.v, size=samples))
        return prof, None
    # many short chains with heavy thinning keep the draws close to independent
    cfg = chain_config or ChainConfig(n_chains=200, n_samples=max(1, samples // 200), thin=100)
    res = sample_twolayer_lg_mcmc(params, seed, cfg)
    prof = res.paths[:, :, 0] - res.paths[:, :1, 0]
    return prof, res


def _binned_chi2(x, y, min_count=10):
    vals = np.union1d(np.unique(x), np.unique(y))
    cx = np.array([(x == v).sum() for v in vals])
    cy = np.array([(y == v).sum() for v in vals])
    bins_x, bins_y = [], []
    ax = ay = 0
    for a, b in zip(cx, cy):
        ax += a
        ay += b
        if ax + ay >= min_count:
            bins_x.append(ax)
            bins_y.append(ay)
            ax = ay = 0
    if ax + ay:
        if bins_x:
            bins_x[-1] += ax
            bins_y[-1] += ay
        else:
            bins_x.append(ax)
            bins_y.append(ay)
    table = np.array([bins_x, bins_y])
    table = table[:, table.sum(axis=0) > 0]
    if table.shape[1] < 2:
        return 0.0, 1.0
    res = stats.chi2_contingency(table, correction=False)
    return float(res[0]), float(res[1])


def stationarity_report(model, params, m: int, samples: int, seed,
                        negative_control: bool = False,
                        chain_config: ChainConfig | None = None,
                        alpha: float = 0.01) -> dict:
    """Evolve stationary profiles m rows and compare each coordinate's law.

    The "before" sample and the evolved "after" sample come from independent
    draws of the stationary law (m = 0 compares a sample with itself).  GEO uses a
    two-sample chi-square test on pooled integer bins, LG the two-sample
    Kolmogorov-Smirnov test.  ``negative_control`` starts from the all-zero
    profile instead, which is not stationary.
    """
    model = _model(model, params)
    if samples < 100:
        raise ValueError("need at least 100 samples")
    N = params.N
    ss = np.random.SeedSequence(seed)
    s_before, s_init, s_weights = ss.spawn(3)
    diag = None
    if negative_control:
        start = np.zeros((samples, N + 1), dtype=np.int64 if model == "GEO" else float)
        before = start
    else:
        before, diag = initial_profiles(model, params, samples, s_before, chain_config)
        start, _ = initial_profiles(model, params, samples, s_init, chain_config) if m > 0 else (before, None)
    n = before.shape[0]
    if m > 0:
        weights = sample_strip_weights(model, params, m, s_weights, replicas=start.shape[0])
        evolve = lpp_evolve if model == "GEO" else polymer_evolve
        after = evolve(start, weights, m).profile
    else:
        after = before.copy()
    coords = []
    for i in range(1, N + 1):
        if model == "GEO":
            stat, p = _binned_chi2(before[:, i], after[:, i])
            test = "chi2"
        else:
            res = stats.ks_2samp(before[:, i], after[:, i])
            stat, p, test = float(res.statistic), float(res.pvalue), "ks"
        coords.append({"x": i, "test": test, "statistic": stat, "p_value": p})
    pmin = min(c["p_value"] for c in coords)
    report = {
        "model": model,
        "params": asdict(params),
        "m": m,
        "n_samples": int(n),
        "negative_control": negative_control,
        "coordinates": coords,
        "min_p_value": pmin,
        "threshold": alpha,
        "passed": bool(pmin > alpha),
        "note": f"per-coordinate threshold {alpha}; Bonferroni level for {N} coordinates is {alpha / N:g}",
    }
    if diag is not None:
        # the tests assume independent draws: require ESS of at least half the sample
        ess_ok = bool(diag.ess >= 0.5 * n)
        report["mcmc"] = {"acceptance": diag.acceptance, "ess": diag.ess, "tau": diag.tau,
                          "ess_ok": ess_ok}
        report["passed"] = report["passed"] and ess_ok
    return report


# ---------------------------------------------------------------------------
# enumeration oracle for the geometric Laplace transform
# ---------------------------------------------------------------------------


@dataclass
class BruteForceResult:
    value: float
    tail_bound: float
    cutoff: int


def _column_t(query, N):
    out = []
    for t, (a, b) in zip(query.t, zip(query.points, query.points[1:])):
        out.extend([t] * (b - a))
    return np.array(out)


def _best_theta(la1, la2, logx, N):
    """Simplex weights theta minimizing the largest envelope ratio.

    The envelope uses x^{min_j A_j} <= x^{sum_j theta_j A_j}, which factorizes
    over increments with log-ratios la1_i + logx * sum_{j>i} theta_j (L1) and
    la2_i + logx * sum_{j<i} theta_j (L2).
    """
    if N == 1:
        grids = [np.array([[1.0]])]
    else:
        n = 1000 if N == 2 else 150
        pts = [p for p in itertools.product(range(n + 1), repeat=N - 1) if sum(p) <= n]
        g = np.array(pts, dtype=float) / n
        grids = [np.column_stack([g, 1 - g.sum(axis=1)])]
    th = grids[0]
    after = np.cumsum(th[:, ::-1], axis=1)[:, ::-1]  # sum_{j >= i}
    gt = np.concatenate([after[:, 1:], np.zeros((len(th), 1))], axis=1)  # sum_{j > i}
    lt = np.concatenate([np.zeros((len(th), 1)), np.cumsum(th, axis=1)[:, :-1]], axis=1)
    r1 = la1[None, :] + logx * gt
    r2 = la2[None, :] + logx * lt
    worst = np.maximum(r1.max(axis=1), r2.max(axis=1))
    k = int(np.argmin(worst))
    return np.exp(r1[k]), np.exp(r2[k])


def _enumerate(a, c1, c2, tcol, C):
    """sum over increments <= C of (c1c2)^{-otimes(N)} prod (a c2 t^2)^{dL1} (a c1)^{dL2}.

    With R_k = L1(k) - otimes(k) one has R_k = dL1_k + max(R_{k-1} - dL2_k, 0)
    and otimes(N) = L1(N) - R_N, so the sum is a transfer-matrix product over
    the scalar state R.  V_k(R) carries the factor (c1c2)^{R}.
    """
    N = len(a)
    d = np.arange(C + 1)
    size = N * C + 1
    g1 = (a[0] * c2 * tcol[0] ** 2) ** d
    V = np.zeros(size)
    V[: C + 1] = g1 * ((a[0] * c1) ** d).sum()
    R = np.arange(size)
    for k in range(1, N):
        tmp = np.zeros(size)
        for d2 in range(C + 1):
            mm = np.minimum(R, d2)
            # (a c1)^{d2} (c1 c2)^{-min(R, d2)} = (a/c2)^{mm} (a c1)^{d2 - mm}
            f = (a[k] / c2) ** mm * (a[k] * c1) ** (d2 - mm)
            tmp += np.bincount(np.maximum(R - d2, 0), weights=V * f, minlength=size)[:size]
        g = (a[k] * c2 * tcol[k] ** 2) ** d
        V = np.convolve(tmp, g)[:size]
    return V.sum()


def brute_force_laplace_geo(params: GeoParams, query, cutoff: int | None = None,
                            target: float = 1e-10) -> BruteForceResult:
    """E[prod t_i^{2 dL1}] under the geometric walk measure by truncated summation.

    Every increment of L1 and L2 is summed over 0..cutoff.  The remainder is
    bounded by a product-form geometric envelope, for numerator and
    denominator separately, and the returned ``tail_bound`` is a certified
    bound on |value - exact|.  With ``cutoff=None`` the cutoff grows until the
    bound is below ``target``.
    """
    params.require_direct()
    N = query.N
    if N > 3:
        raise ParameterError("enumeration oracle supports N <= 3")
    if params.c1 * params.c2 <= 0:
        raise ParameterError("need c1 c2 > 0")
    a = np.array(params.rates(N))
    tcol = _column_t(query, N)
    logx = -math.log(params.c1 * params.c2)

    def envelope(ts):
        r1, r2 = _best_theta(np.log(a * params.c2 * ts**2), np.log(a * params.c1), logx, N)
        if max(r1.max(), r2.max()) >= 1:
            raise ParameterError("no geometric envelope: cannot certify the tail")
        return np.concatenate([r1, r2])

    def tail(rho, C):
        full = np.prod(1 / (1 - rho))
        return full * np.sum(rho ** (C + 1))

    rho_num = envelope(tcol)
    rho_den = envelope(np.ones(N))

    def run(C):
        num = _enumerate(a, params.c1, params.c2, tcol, C)
        den = _enumerate(a, params.c1, params.c2, np.ones(N), C)
        tn, td = tail(rho_num, C), tail(rho_den, C)
        val = num / den
        lo = num / (den + td)
        hi = (num + tn) / den
        return val, max(val - lo, hi - val)

    if cutoff is not None:
        val, bound = run(cutoff)
        return BruteForceResult(val, bound, cutoff)
    rho = max(rho_num.max(), rho_den.max())
    C = max(10, int(math.ceil(math.log(target / 100) / math.log(rho))))
    for _ in range(8):
        val, bound = run(C)
        if bound <= target:
            return BruteForceResult(val, bound, C)
        C = int(C * 1.5)
    raise ParameterError(f"cutoff {C} too small for the requested bound {target}")


def mean_h11_lg(params: LGParams, replicas: int, seed, chain_config: ChainConfig | None = None) -> McEstimate:
    """Monte Carlo E[H(1,1)] from one polymer row started at stationary data."""
    ss = np.random.SeedSequence(seed)
    s1, s2 = ss.spawn(2)
    prof, _ = initial_profiles("LG", params, replicas, s1, chain_config)
    w = sample_strip_weights("LG", params, 1, s2, replicas=prof.shape[0])
    return mean_estimate(polymer_evolve(prof, w, 1).anchor)
