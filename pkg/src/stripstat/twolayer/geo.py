"""Two-layer Schur measures: densities, Doob functions h/q, kernels, exact sampler."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from ..formulas import partition_geo
from ..numerics import ContourSpec, integrate_circle
from ..params import GeoParams, ParameterError
from ..schur import as_signature, interlaces, skew_schur_value

__all__ = [
    "RIGHT",
    "DOWN",
    "twolayer_logdensity_geo",
    "q_geo",
    "h_geo",
    "GeoDoob",
    "kernel_geo",
    "kernel_word_step_geo",
    "sample_twolayer_geo",
    "limit_doob_geo",
    "limit_kernel_geo",
]

RIGHT = "RIGHT"
DOWN = "DOWN"

TAIL_EPS = 1e-12


def _word(word, N):
    if word is None:
        return (RIGHT,) * N
    word = tuple(str(w).upper() for w in word)
    if len(word) != N:
        raise ValueError(f"word has length {len(word)}, path has {N} steps")
    if any(w not in (RIGHT, DOWN) for w in word):
        raise ValueError("word letters must be RIGHT or DOWN")
    return word


def _xlog(k, c):
    if k == 0:
        return 0.0
    return k * math.log(c) if c > 0 else -math.inf


def twolayer_logdensity_geo(path, params: GeoParams, word=None) -> float:
    """Unnormalized log-weight of a two-layer path lambda^0..lambda^N.

    c1^{lambda_1^0} c2^{lambda_1^N - lambda_2^N} prod_i s(a_i), where the i-th
    skew factor is s_{lambda^i/lambda^{i-1}} on RIGHT letters and
    s_{lambda^{i-1}/lambda^i} on DOWN letters.  Returns -inf off the support.
    """
    path = np.asarray(path, dtype=np.int64)
    if path.ndim != 2 or path.shape[1] != 2:
        raise ValueError("path must have shape (N+1, 2)")
    N = path.shape[0] - 1
    word = _word(word, N)
    if path[0, 1] != 0:
        raise ParameterError("the bottom-left coordinate lambda_2^0 must be 0")
    rates = params.rates(N) if N else ()
    out = _xlog(int(path[0, 0] - path[0, 1]), params.c1)
    out += _xlog(int(path[N, 0] - path[N, 1]), params.c2)
    for i in range(1, N + 1):
        prev, cur = path[i - 1], path[i]
        lo, hi = (prev, cur) if word[i - 1] == RIGHT else (cur, prev)
        if not interlaces(lo, hi):
            return -math.inf
        out += _xlog(int(hi.sum() - lo.sum()), rates[i - 1])
    return out


# ---------------------------------------------------------------------------
# q and h
# ---------------------------------------------------------------------------


def _r_factor(z, c2, rates):
    out = 1.0 / ((1 - c2 * z) * (1 - c2 / z))
    for a in rates:
        out = out * (1 - a) ** 2 / ((1 - a * z) * (1 - a / z))
    return out


def q_geo(M: int, l: int, params: GeoParams, rel_tol: float = 1e-13) -> float:
    """q_M(l) by trapezoid quadrature on the unit circle.

    Uses the last M bulk parameters a_{N-M+1..N}.
    """
    params.require_direct()
    if M < 0 or l < 0:
        raise ValueError("need M >= 0 and l >= 0")
    rates = params.a[len(params.a) - M:] if M else ()
    if M > params.N:
        rates = params.rates(M)

    def f(z):
        return (0.5 * (z ** (l + 1) - z ** (-l - 1)) * (1 / z - z)
                * _r_factor(z, params.c2, rates) / z)

    spec = ContourSpec.circle(rel_tol=rel_tol)
    return integrate_circle(f, spec).require().real


class GeoDoob:
    """Cached q_M tables and the normalizer for one parameter set.

    With R_M(z) = prod (1-a)^2 / ((1-az)(1-a/z)) / ((1-c2 z)(1-c2/z)) and
    r_n its Fourier coefficients, the circle integral for q collapses to
    q_M(l) = r_l - r_{l+2}; r_n comes from one FFT of R_M on the unit circle.
    """

    def __init__(self, params: GeoParams):
        params.require_direct()
        self.params = params
        self.N = params.N
        self._tables: dict[int, np.ndarray] = {}
        self._den = None

    def _rates(self, M):
        return self.params.a[self.N - M:] if M else ()

    def _fourier(self, M, n):
        z = np.exp(2j * np.pi * np.arange(n) / n)
        return np.fft.fft(_r_factor(z, self.params.c2, self._rates(M))).real / n

    def table(self, M: int, lmax: int) -> np.ndarray:
        """q_M(0..lmax)."""
        if not 0 <= M <= self.N:
            raise ValueError(f"M must lie in 0..{self.N}")
        tab = self._tables.get(M)
        if tab is not None and len(tab) > lmax:
            return tab[: lmax + 1]
        rho = max([self.params.c2, *self._rates(M), 1e-3])
        n = 1 << max(6, int(math.ceil(math.log2(lmax + 3 + 45.0 / -math.log(rho)))))
        r = self._fourier(M, n)
        while True:
            r2 = self._fourier(M, 2 * n)
            k = lmax + 3
            if np.max(np.abs(r2[:k] - r[:k])) <= 1e-15 * np.max(np.abs(r2[:k])):
                break
            n, r = 2 * n, r2
        size = max(lmax + 1, n // 4)
        tab = r2[:size] - r2[2: size + 2]
        self._tables[M] = tab
        return tab[: lmax + 1]

    def q(self, M, l):
        l = np.asarray(l, dtype=np.int64)
        if np.any(l < 0):
            raise ValueError("gap must be nonnegative")
        return self.table(M, int(l.max()) if l.size else 0)[l]

    @property
    def denominator(self) -> float:
        """sum_l c1^l q_N(l) = prod (1-a_i)^2 Z_Geo(N)."""
        if self._den is None:
            pref = math.prod((1 - a) ** 2 for a in self.params.a)
            self._den = pref * partition_geo(self.N, self.params)
        return self._den

    def h(self, x, l):
        return self.q(self.N - x, l) / self.denominator

    @property
    def q_bound(self) -> float:
        # |q_M(l)| <= 2 max_{|z|=1} |R_M| = 2 / (1 - c2)^2
        return 2.0 / (1 - self.params.c2) ** 2

    def gap_cutoff(self) -> int:
        """G with sum_{l > G} c1^l q_N(l) / den < TAIL_EPS."""
        c1 = self.params.c1
        if c1 == 0:
            return 0
        target = TAIL_EPS * (1 - c1) * self.denominator / self.q_bound
        return max(0, int(math.ceil(math.log(target) / math.log(c1))))

    def step_table(self, x: int, g: int):
        """Law of (i, j) for the step x -> x+1 from a state with gap g.

        mu = (lambda_1 + j, lambda_2 + i), 0 <= i <= g, j >= 0, with weight
        (1-a)^2 a^{i+j} q_{N-x-1}(g+j-i) / q_{N-x}(g).
        """
        a = self.params.a[x]
        qg = float(self.q(self.N - x, g))
        if a == 0:
            J = 0
        else:
            bound = (g + 1) * (1 - a) * self.q_bound / qg
            J = max(0, int(math.ceil(math.log(TAIL_EPS / bound) / math.log(a))))
        i = np.arange(g + 1)[:, None]
        j = np.arange(J + 1)[None, :]
        qn = self.q(self.N - x - 1, g + j - i)
        w = (1 - a) ** 2 * (float(a) ** (i + j)) * qn / qg
        if np.any(w < -1e-14):
            raise ArithmeticError("negative transition weight")
        mass = w.sum()
        if abs(mass - 1) > 1e-9:
            raise ArithmeticError(f"transition mass {mass} differs from 1 (x={x}, g={g})")
        return np.broadcast_to(i, w.shape).ravel(), np.broadcast_to(j, w.shape).ravel(), w.ravel() / mass


@lru_cache(maxsize=32)
def _doob(params: GeoParams) -> GeoDoob:
    return GeoDoob(params)


def h_geo(x: int, N: int, l, params: GeoParams):
    """h_{x,N}(l) = q_{N-x}(l) / (prod (1-a_i)^2 Z_Geo(N))."""
    if N != params.N:
        params = GeoParams(params.rates(N), params.c1, params.c2)
    return _doob(params).h(x, l)


def _gap(s):
    return int(s[0]) - int(s[1])


def kernel_geo(x: int, y: int, lam, mu, params: GeoParams) -> float:
    """p_{x,y}(lambda, mu) for 0 <= x < y <= N."""
    N = params.N
    if not 0 <= x < y <= N:
        raise ValueError("need 0 <= x < y <= N")
    lam = as_signature(lam)
    mu = as_signature(mu)
    rates = params.a[x:y]
    s = skew_schur_value(mu, lam, rates)
    if s == 0:
        return 0.0
    d = _doob(params)
    pref = math.prod((1 - a) ** 2 for a in rates)
    return float(pref * s * d.h(y, _gap(mu)) / d.h(x, _gap(lam)))


def kernel_word_step_geo(x: int, direction: str, lam, mu, params: GeoParams) -> float:
    """Step x-1 -> x along a RIGHT or DOWN letter, for 1 <= x <= N."""
    N = params.N
    if not 1 <= x <= N:
        raise ValueError("step index must lie in 1..N")
    direction = str(direction).upper()
    if direction == RIGHT:
        return kernel_geo(x - 1, x, lam, mu, params)
    if direction != DOWN:
        raise ValueError("direction must be RIGHT or DOWN")
    lam = as_signature(lam)
    mu = as_signature(mu)
    a = params.a[x - 1]
    s = skew_schur_value(lam, mu, [a])
    if s == 0:
        return 0.0
    d = _doob(params)
    return float((1 - a) ** 2 * s * d.h(x, _gap(mu)) / d.h(x - 1, _gap(lam)))


def sample_twolayer_geo(params: GeoParams, seed, count: int) -> np.ndarray:
    """Exact samples of the horizontal two-layer Schur measure.

    Returns an integer array of shape (count, N+1, 2).  lambda_1^0 is the gap
    drawn from c1^l q_N(l) / den; every later state is drawn by inverse CDF
    over the interlacing successors.
    """
    d = _doob(params)
    N = d.N
    rng = np.random.default_rng(seed)
    G = d.gap_cutoff()
    w0 = params.c1 ** np.arange(G + 1) * d.q(N, np.arange(G + 1)) / d.denominator
    if abs(w0.sum() - 1) > 1e-9:
        raise ArithmeticError(f"gap law mass {w0.sum()} differs from 1")
    cdf0 = np.cumsum(w0 / w0.sum())
    out = np.zeros((count, N + 1, 2), dtype=np.int64)
    out[:, 0, 0] = np.minimum(np.searchsorted(cdf0, rng.random(count), side="right"), G)
    for x in range(N):
        gaps = out[:, x, 0] - out[:, x, 1]
        uni = rng.random(count)
        for g in np.unique(gaps):
            idx = np.nonzero(gaps == g)[0]
            ii, jj, w = d.step_table(x, int(g))
            cdf = np.cumsum(w)
            k = np.minimum(np.searchsorted(cdf, uni[idx], side="right"), len(w) - 1)
            out[idx, x + 1, 0] = out[idx, x, 0] + jj[k]
            out[idx, x + 1, 1] = out[idx, x, 1] + ii[k]
    return out


# ---------------------------------------------------------------------------
# N -> infinity limits
# ---------------------------------------------------------------------------


def _require_homogeneous(params):
    if not params.is_homogeneous:
        raise ParameterError("the limit objects need homogeneous bulk parameters")


def limit_doob_geo(l, params: GeoParams):
    """h(l) = (l + 1)(1 - c1)^2."""
    _require_homogeneous(params)
    if not params.c2 < 1:
        raise ParameterError("the limit needs c2 < 1")
    l = np.asarray(l)
    return (l + 1) * (1 - params.c1) ** 2


def limit_kernel_geo(lam, mu, params: GeoParams) -> float:
    """(1-a)^2 s_{mu/lambda}(a) h(mu_1 - mu_2) / h(lambda_1 - lambda_2)."""
    _require_homogeneous(params)
    a = params.a[0]
    lam = as_signature(lam)
    mu = as_signature(mu)
    s = skew_schur_value(mu, lam, [a])
    if s == 0:
        return 0.0
    return float((1 - a) ** 2 * s * limit_doob_geo(_gap(mu), params) / limit_doob_geo(_gap(lam), params))
