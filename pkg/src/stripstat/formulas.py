"""Partition functions, multipoint Laplace transforms and the free-energy mean.

Conventions at the API boundary (``LaplaceQuery.t``):

* GEO: the query returns E[prod_i t_i^{2 (L1(x_i) - L1(x_{i-1}))}].
* LG:  the query returns E[exp(-2 sum_i t_i (L1(x_i) - L1(x_{i-1})))].

Internally the geometric integrand is written with these t directly (so the
square roots of the squared parameters never appear) and the log-gamma one
with the same t, i.e. Gamma(alpha + t +- z) etc.

Multi-fold integrals (k >= 2) are chains: each variable only talks to its
neighbours, so a k-fold tensor trapezoid sum is a product of k - 1 kernel
matrices applied to vectors.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .numerics import (
    ContourSpec,
    GammaFactor,
    GammaProduct,
    NonConvergenceError,
    digamma,
    integrate_circle,
    log_gamma,
    rgamma_pm2z,
)
from .params import GeoParams, LGParams, ParameterError

__all__ = [
    "LaplaceQuery",
    "partition_geo",
    "partition_geo_residues",
    "partition_lg",
    "laplace_geo",
    "laplace_lg",
    "laplace_lg_continued",
    "mean_free_energy",
    "lg_gamma_product",
]

MAX_FOLD = 3


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LaplaceQuery:
    """Observation points 0 = x_0 < ... < x_k = N and parameters t_1..t_k."""

    model: str
    points: tuple
    t: tuple
    continuation: bool = False

    def __post_init__(self):
        model = self.model.upper()
        if model not in ("GEO", "LG"):
            raise ParameterError(f"unknown model {self.model!r}")
        object.__setattr__(self, "model", model)
        pts = tuple(int(x) for x in self.points)
        ts = tuple(float(x) for x in self.t)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "t", ts)
        if len(pts) < 2 or pts[0] != 0:
            raise ParameterError("points must start at 0 and contain at least one more point")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ParameterError("points must be strictly increasing")
        if len(ts) != len(pts) - 1:
            raise ParameterError("need one t per interval")
        if len(ts) > MAX_FOLD:
            raise ParameterError(f"at most {MAX_FOLD} intervals are supported")

    @classmethod
    def single(cls, model: str, N: int, t: float, continuation: bool = False):
        return cls(model, (0, N), (t,), continuation)

    @property
    def N(self) -> int:
        return self.points[-1]

    @property
    def k(self) -> int:
        return len(self.t)

    def blocks(self):
        """(t_i, number of columns in block i) for each interval."""
        return [(t, b - a) for t, (a, b) in zip(self.t, zip(self.points, self.points[1:]))]


# ---------------------------------------------------------------------------
# geometric model
# ---------------------------------------------------------------------------


def _geo_measure(z):
    # m(dz)/(2 pi i) on the unit circle, with dz/(2 pi i) = z dtheta / (2 pi)
    return (1 - z * z) * (1 - 1 / (z * z)) / 2.0


def _pair(z, c):
    """phi(z, c) phi(1/z, c) = 1/((1 - c z)(1 - c/z))."""
    return 1.0 / ((1 - c * z) * (1 - c / z))


def partition_geo(N: int, params: GeoParams, rel_tol: float = 1e-13) -> float:
    """Z_Geo(N) by trapezoid quadrature on the unit circle (c1, c2 < 1)."""
    params.require_direct()
    rates = params.rates(N) if N else ()

    def f(z):
        out = _geo_measure(z) / z * _pair(z, params.c1) * _pair(z, params.c2)
        for a in rates:
            out = out * _pair(z, a)
        return out

    res = integrate_circle(f, ContourSpec.circle(rel_tol=rel_tol)).require()
    return res.real


def partition_geo_residues(N: int, params: GeoParams) -> float:
    """Z_Geo(N) as the sum of residues inside the unit circle.

    With P = (c1, c2, a_1..a_N) the integrand is
    -(1 - z^2)^2 z^{|P|-3} / (2 prod_p (z - p) prod_p (1 - p z)),
    so the poles inside are the points of P, plus z = 0 when |P| = 2.
    Coinciding points are grouped and handled by a small circle quadrature.
    """
    params.require_direct()
    P = [params.c1, params.c2, *(params.rates(N) if N else ())]
    n = len(P)

    def f(z):
        num = -((1 - z * z) ** 2) * z ** (n - 3)
        den = 2.0
        for p in P:
            den = den * (z - p) * (1 - p * z)
        return num / den

    total = 0.0
    if n < 3:
        # pole of order 3 - n at the origin (only n = 2 occurs)
        total += -1.0 / (2.0 * np.prod([-p for p in P]))
    pts = sorted(set(P))
    groups: list[list[float]] = []
    for p in pts:
        if groups and p - groups[-1][-1] < 1e-6:
            groups[-1].append(p)
        else:
            groups.append([p])
    for g in groups:
        if len(g) == 1 and P.count(g[0]) == 1 and g[0] != 0:
            p = g[0]
            rest = -((1 - p * p) ** 2) * p ** (n - 3) / 2.0
            for q in P:
                rest /= 1 - q * p
            for q in P:
                if q != p:
                    rest /= p - q
            total += rest
        else:
            centre = float(np.mean(g))
            others = [abs(q - centre) for q in pts if q not in g] + [1.0 - centre]
            if centre != 0:
                others.append(centre)
            r = 0.5 * min(others)
            res = integrate_circle(f, ContourSpec.circle(radius=r, center=centre, rel_tol=1e-13))
            total += res.require().real
    return float(total)


def _geo_blocks(query: LaplaceQuery, params: GeoParams):
    params.require_direct()
    N = query.N
    rates = params.rates(N)
    t = query.t
    if not (params.c1 < t[0]):
        raise ParameterError("need c1 < t_1")
    if any(b <= a for a, b in zip(t, t[1:])):
        raise ParameterError("need t_1 < ... < t_k")
    if params.c2 * t[-1] >= 1:
        raise ParameterError("need t_k < 1/c2")
    blocks = []
    for i, (a0, b0) in enumerate(zip(query.points, query.points[1:])):
        rs = rates[a0:b0]
        if any(r * t[i] >= 1 for r in rs):
            raise ParameterError("need a_r t_i < 1 for every column r of block i")
        blocks.append(rs)
    return blocks


def _circle_chain(vectors, kernels, n):
    """mean over the n^k tensor grid of prod g_i(z_i) prod K_i(z_i, z_{i+1})."""
    acc = vectors[0]
    for K, g in zip(kernels, vectors[1:]):
        acc = (acc @ K) * g
    return acc.sum() / n ** len(vectors)


def laplace_geo(query: LaplaceQuery, params: GeoParams, rel_tol: float = 1e-11,
                max_nodes: int | None = None) -> float:
    """E[prod t_i^{2 (L1(x_i) - L1(x_{i-1}))}] for the geometric stationary measure."""
    if query.model != "GEO":
        raise ParameterError("laplace_geo needs a GEO query")
    blocks = _geo_blocks(query, params)
    t = query.t
    k = query.k
    if max_nodes is None:
        max_nodes = {1: 2**16, 2: 2**11, 3: 2**10}[k]

    def value(n):
        z = np.exp(2j * np.pi * (np.arange(n) + 0.5) / n)
        vecs = []
        for i in range(k):
            g = _geo_measure(z)
            for a in blocks[i]:
                g = g * _pair(z, a * t[i])
            if i == 0:
                g = g * _pair(z, params.c1 / t[0])
            if i == k - 1:
                g = g * _pair(z, params.c2 * t[-1])
            vecs.append(g)
        kers = []
        for i in range(k - 1):
            s = t[i] / t[i + 1]
            z1, z2 = z[:, None], z[None, :]
            K = (1 - s * s) * _pair(z1 * z2, s) * _pair(z2 / z1, s)
            kers.append(K)
        return _circle_chain(vecs, kers, n)

    n = 32
    prev = value(n)
    last_diff = math.inf
    while True:
        n *= 2
        if n > max_nodes:
            raise NonConvergenceError("laplace_geo: node budget exhausted")
        cur = value(n)
        diff = abs(cur - prev)
        # the trapezoid error decays geometrically in n, so after a doubling
        # the remaining error is about diff^2 / last_diff
        if diff <= rel_tol * abs(cur) or (
            last_diff < math.inf and diff < 0.5 * last_diff and diff * diff / last_diff <= rel_tol * abs(cur)
        ):
            break
        prev, last_diff = cur, diff
    return float(cur.real) / partition_geo(query.N, params)


# ---------------------------------------------------------------------------
# log-gamma model
# ---------------------------------------------------------------------------


def _pm(shift, factors, power=1):
    factors.append(GammaFactor(shift, 1, power=power))
    factors.append(GammaFactor(shift, -1, power=power))


def lg_gamma_product(u, v, alphas: Sequence[float], shift: float = 0.0,
                     extra=None) -> GammaProduct:
    """Gamma(u - s +- z) Gamma(v + s +- z) prod Gamma(alpha_i + s +- z) / (2 Gamma(+-2z))."""
    factors: list[GammaFactor] = []
    _pm(u - shift, factors)
    _pm(v + shift, factors)
    for a, m in sorted(Counter(alphas).items()):
        _pm(a + shift, factors, power=m)

    def base(z):
        return 0.5 * rgamma_pm2z(z)

    prod = GammaProduct(factors, base, decay_rate=math.pi * max(len(alphas), 1))
    return prod.with_extra(extra) if extra is not None else prod


def partition_lg(N: int, params: LGParams, rel_tol: float = 1e-12) -> float:
    """Z_LG(N) = int_{iR} Gamma(u+-z)Gamma(v+-z) prod Gamma(alpha_i+-z) / (2 Gamma(+-2z)) dz/(2 pi i).

    For u or v <= 0 the analytic continuation (shifted line plus residues) is
    returned.
    """
    if N < 1:
        raise ParameterError("the contour integral needs N >= 1")
    prod = lg_gamma_product(params.u, params.v, params.rates(N))
    return float(prod.continued_integral(rel_tol=rel_tol).value.real)


def _lg_check(query: LaplaceQuery, params: LGParams):
    params.require_direct()
    t = query.t
    if not params.u > t[0]:
        raise ParameterError("need u > t_1")
    if any(b >= a for a, b in zip(t, t[1:])):
        raise ParameterError("need t_1 > ... > t_k")
    if not t[-1] > -params.v:
        raise ParameterError("need t_k > -v")
    rates = params.rates(query.N)
    for i, (a0, b0) in enumerate(zip(query.points, query.points[1:])):
        if any(r + t[i] <= 0 for r in rates[a0:b0]):
            raise ParameterError("need alpha_r + t_i > 0 for every column r of block i")
    return rates


def _lg_pm_log(shift, z):
    return np.asarray(log_gamma(shift + z)) + np.asarray(log_gamma(shift - z))


def _vertical_chain(logvecs, logkers, rel_tol, half_height):
    """(1/2 pi)^k h^k sum over the tensor grid, refining h until stable."""

    def value(h):
        y = np.arange(-half_height, half_height + 0.5 * h, h)
        z = 1j * y
        vecs = [np.exp(f(z)) for f in logvecs]
        acc = vecs[0]
        for K, g in zip(logkers, vecs[1:]):
            acc = (acc @ np.exp(K(z[:, None], z[None, :]))) * g
        return acc.sum() * (h / (2 * np.pi)) ** len(vecs)

    h = 0.25
    prev = value(h)
    while True:
        h *= 0.5
        if h < 1.0 / 128:
            raise NonConvergenceError("vertical chain quadrature did not converge")
        cur = value(h)
        if abs(cur - prev) <= rel_tol * abs(cur):
            return cur
        prev = cur


def laplace_lg(query: LaplaceQuery, params: LGParams, rel_tol: float = 1e-10) -> float:
    """E[exp(-2 sum t_i (L1(x_i) - L1(x_{i-1})))] in the direct regime u, v > 0.

    With ``query.continuation`` and k = 1 the call is forwarded to
    :func:`laplace_lg_continued`.
    """
    if query.model != "LG":
        raise ParameterError("laplace_lg needs an LG query")
    if query.continuation:
        if query.k != 1:
            raise ParameterError("analytic continuation is implemented for k = 1 only")
        return laplace_lg_continued(query.N, query.t[0], params)
    rates = _lg_check(query, params)
    N, t, k = query.N, query.t, query.k
    Z = partition_lg(N, params)
    if k == 1:
        prod = lg_gamma_product(params.u, params.v, rates, shift=t[0])
        return float(prod.continued_integral(rel_tol=rel_tol, sigma=0.0).value.real) / Z

    def vec(i):
        cols = rates[query.points[i]:query.points[i + 1]]

        def f(z):
            out = np.log(np.asarray(0.5 * rgamma_pm2z(z), dtype=complex))
            for a in cols:
                out = out + _lg_pm_log(a + t[i], z)
            if i == 0:
                out = out + _lg_pm_log(params.u - t[0], z)
            if i == k - 1:
                out = out + _lg_pm_log(params.v + t[-1], z)
            return out

        return f

    def ker(i):
        d = t[i] - t[i + 1]
        norm = math.lgamma(2 * d)

        def K(z1, z2):
            return _lg_pm_log(d + z1, z2) + _lg_pm_log(d - z1, z2) - norm

        return K

    # every variable decays at least like exp(-2 pi |y|): its own Gamma pairs
    # plus the neighbouring cross factors beat the growth of 1/Gamma(+-2z)
    half = 45.0 / (2 * math.pi)
    val = _vertical_chain([vec(i) for i in range(k)], [ker(i) for i in range(k - 1)], rel_tol, half)
    return float(val.real) / Z


def laplace_lg_continued(N: int, t: float, params: LGParams, rel_tol: float = 1e-10) -> float:
    """E[exp(-2 t L1(N))] by analytic continuation in u and/or v (k = 1).

    Both the numerator I(t) and the normalization I(0) are continued
    integrals: a vertical line plus signed residues at the u- and v-family
    poles that sit on the wrong side of it.
    """
    rates = params.rates(N)
    a_min = min(rates)
    if not 2 * t > -a_min + max(abs(params.u), abs(params.v)):
        raise ParameterError("need 2t > -alpha + max(|u|, |v|)")
    if any(a + t <= 0 for a in rates):
        raise ParameterError("need alpha + t > 0")
    num = lg_gamma_product(params.u, params.v, rates, shift=t).continued_integral(rel_tol=rel_tol)
    den = lg_gamma_product(params.u, params.v, rates).continued_integral(rel_tol=rel_tol)
    return float(num.value.real / den.value.real)


def mean_free_energy(n: int, params: LGParams, rel_tol: float = 1e-11) -> float:
    """E[H(n, n)] for the stationary log-gamma polymer, n a multiple of N.

    -n / Z * int Gamma(u+-z)Gamma(v+-z)Gamma(alpha+-z)^N/(2Gamma(+-2z)) (psi(alpha+z)+psi(alpha-z)).
    """
    N = params.N
    if not params.is_homogeneous:
        raise ParameterError("mean_free_energy needs homogeneous alpha")
    if n % N:
        raise ParameterError("n must be a multiple of N")
    alpha = params.alphas[0]

    def psi_pair(z):
        return np.asarray(digamma(alpha + z)) + np.asarray(digamma(alpha - z))

    base = lg_gamma_product(params.u, params.v, params.alphas)
    num = base.with_extra(psi_pair)
    num.decay_rate = base.decay_rate
    sigma = base.choose_sigma()
    top = num.continued_integral(rel_tol=rel_tol, sigma=sigma).value.real
    bottom = base.continued_integral(rel_tol=rel_tol, sigma=sigma).value.real
    return float(-n * top / bottom)
