"""Two-layer Whittaker measures: densities, Doob functions Q/H, kernels, MCMC and IS."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from ..formulas import partition_lg
from ..mc import McEstimate, integrated_autocorr_time, snis_estimate
from ..numerics import (
    ContourSpec,
    NonConvergenceError,
    bessel_k,
    integrate_vertical,
    log_bessel_k,
    log_gamma,
    rgamma_pm2z,
)
from ..params import LGParams, ParameterError
from ..whittaker import log_baxter, skew_whittaker
from .geo import DOWN, RIGHT, _word
from .walks import pitman_lg

__all__ = [
    "twolayer_logdensity_lg",
    "Q_lg",
    "Q_lg_grid",
    "H_lg",
    "LGDoob",
    "kernel_lg",
    "kernel_word_step_lg",
    "ChainConfig",
    "McmcResult",
    "sample_twolayer_lg_mcmc",
    "ISResult",
    "importance_sample_lg",
    "limit_doob_lg",
    "limit_kernel_lg",
]


def twolayer_logdensity_lg(path, params: LGParams, word=None):
    """Unnormalized log-density of real two-layer paths, shape (..., N+1, 2).

    -u lambda_1^0 - v (lambda_1^N - lambda_2^N) + sum_i log Psi_{alpha_i}, with
    Psi(lambda^i / lambda^{i-1}) on RIGHT letters and the reverse on DOWN.
    """
    path = np.asarray(path, dtype=float)
    if path.shape[-1] != 2 or path.ndim < 2:
        raise ValueError("path must have shape (..., N+1, 2)")
    N = path.shape[-2] - 1
    word = _word(word, N)
    if np.any(path[..., 0, 1] != 0):
        raise ParameterError("the bottom-left coordinate lambda_2^0 must be 0")
    rates = params.rates(N) if N else ()
    out = -params.u * path[..., 0, 0] - params.v * (path[..., N, 0] - path[..., N, 1])
    for i in range(1, N + 1):
        prev, cur = path[..., i - 1, :], path[..., i, :]
        hi, lo = (cur, prev) if word[i - 1] == RIGHT else (prev, cur)
        out = out + log_baxter(rates[i - 1], hi[..., 0], hi[..., 1], lo[..., 0], lo[..., 1])
    return out


# ---------------------------------------------------------------------------
# Q and H
# ---------------------------------------------------------------------------


def _q_integrand(M_rates, v, x):
    lg_al = [2 * np.real(log_gamma(a)) for a in M_rates]

    def f(z):
        z = np.asarray(z, dtype=complex)
        # K_nu(x) ~ e^{-x}: scale it out so huge x does not underflow
        lg = log_bessel_k(2 * z, x) + x + log_gamma(v + z) + log_gamma(v - z)
        for a, c in zip(M_rates, lg_al):
            lg = lg + log_gamma(a + z) + log_gamma(a - z) - c
        return np.exp(lg) * rgamma_pm2z(z)

    return f


def Q_lg(M: int, l: float, params: LGParams, rel_tol: float = 1e-11) -> float:
    """Q_M(l) by quadrature on the imaginary axis (last M bulk parameters)."""
    params.require_direct()
    if M < 0:
        raise ValueError("M must be nonnegative")
    if M == 0:
        return math.exp(-params.v * l)
    rates = params.alphas[len(params.alphas) - M:] if M <= params.N else params.rates(M)
    x = 2.0 * math.exp(-0.5 * l)
    if x > 1500.0:
        return 0.0
    f = _q_integrand(rates, params.v, x)
    spec = ContourSpec.vertical(0.0, decay_rate=math.pi * M, rel_tol=rel_tol)
    res = integrate_vertical(f, spec, decay_rate=math.pi * M).require()
    return res.real * math.exp(-x)


class LGDoob:
    """Normalizer and (optionally interpolated) Q_M values for one parameter set."""

    grid_step = 1e-2

    def __init__(self, params: LGParams):
        params.require_direct()
        self.params = params
        self.N = params.N
        self._den = None
        self._splines: dict[tuple, CubicSpline] = {}

    @property
    def denominator(self) -> float:
        """int e^{-u l} Q_N(l) dl = Z_LG(N) / prod Gamma(alpha_i)^2."""
        if self._den is None:
            lg = sum(2 * math.lgamma(a) for a in self.params.alphas)
            self._den = partition_lg(self.N, self.params) * math.exp(-lg)
        return self._den

    def Q(self, M, l):
        return Q_lg(M, l, self.params)

    def H(self, x, l):
        return self.Q(self.N - x, l) / self.denominator

    def Q_interp(self, M: int, l, lo: float = -8.0, hi: float = 12.0):
        """Cubic interpolation of Q_M on a grid of step 1e-2 over [lo, hi]."""
        l = np.asarray(l, dtype=float)
        if np.any((l < lo) | (l > hi)):
            raise ValueError(f"interpolation grid covers [{lo}, {hi}] only")
        key = (M, lo, hi)
        sp = self._splines.get(key)
        if sp is None:
            grid = np.linspace(lo, hi, int(round((hi - lo) / self.grid_step)) + 1)
            sp = CubicSpline(grid, Q_lg_grid(M, grid, self.params))
            self._splines[key] = sp
        return sp(l)


def Q_lg_grid(M: int, ls, params: LGParams, rel_tol: float = 1e-11) -> np.ndarray:
    """Q_M on many gaps at once with a shared trapezoid rule on the imaginary axis."""
    params.require_direct()
    ls = np.asarray(ls, dtype=float)
    if M == 0:
        return np.exp(-params.v * ls)
    rates = params.alphas[len(params.alphas) - M:] if M <= params.N else params.rates(M)
    x = 2.0 * np.exp(-0.5 * ls)
    ymax = (-math.log(rel_tol) + 10.0) / (math.pi * M)
    lg_al = sum(2 * math.lgamma(a) for a in rates)

    def weights(y):
        z = 1j * y
        lg = log_gamma(params.v + z) + log_gamma(params.v - z) - lg_al
        for a in rates:
            lg = lg + log_gamma(a + z) + log_gamma(a - z)
        return np.exp(lg) * rgamma_pm2z(z)

    def rule(h, ymax):
        # the integrand is even in y: sum over y >= 0 and double
        y = np.arange(0.0, ymax + h, h)
        w = weights(y) * np.where(y == 0, 1.0, 2.0)
        k = bessel_k(2j * y[:, None], x[None, :])
        terms = w[:, None] * k
        c = h / (2 * np.pi)
        tail = np.abs(terms[-1])
        return c * np.real(terms.sum(axis=0)), c * np.abs(terms).sum(axis=0), c * tail / h

    # for large x the Bessel factor barely decays in y, so the cut-off is
    # extended until the last node is negligible for every gap
    h = 0.25
    while True:
        prev, scale, tail = rule(h, ymax)
        if np.all(tail <= 1e-3 * (rel_tol * np.abs(prev) + 1e-15 * scale)) or ymax > 1e3:
            break
        ymax *= 1.5
    while h > 1e-3:
        h *= 0.5
        cur, scale, _ = rule(h, ymax)
        # at large gaps Q is far below the integrand size: cancellation floor
        if np.all(np.abs(cur - prev) <= rel_tol * np.abs(cur) + 1e-15 * scale + 1e-300):
            return cur
        prev = cur
    raise NonConvergenceError("Q grid quadrature did not converge")


@lru_cache(maxsize=32)
def _doob(params: LGParams) -> LGDoob:
    return LGDoob(params)


def H_lg(x: int, N: int, l: float, params: LGParams) -> float:
    """H_{x,N}(l) = Q_{N-x}(l) Gamma-normalized by Z_LG(N)."""
    if N != params.N:
        params = LGParams(params.rates(N), params.u, params.v)
    return _doob(params).H(x, l)


def _gap(s):
    return float(s[0]) - float(s[1])


def kernel_lg(x: int, y: int, lam, mu, params: LGParams, rel_tol: float = 1e-9) -> float:
    """P_{x,y}(lambda, mu) = prod Gamma(alpha_i)^{-2} Psi(mu/lambda) H_y(mu) / H_x(lambda)."""
    N = params.N
    if not 0 <= x < y <= N:
        raise ValueError("need 0 <= x < y <= N")
    rates = params.alphas[x:y]
    if len(rates) > 2:
        raise ValueError("kernel_lg supports y - x <= 2")
    d = _doob(params)
    psi = skew_whittaker(rates, mu, lam, rel_tol=rel_tol)
    lg = sum(2 * math.lgamma(a) for a in rates)
    return float(psi * math.exp(-lg) * d.H(y, _gap(mu)) / d.H(x, _gap(lam)))


def kernel_word_step_lg(x: int, direction: str, lam, mu, params: LGParams) -> float:
    """Step x-1 -> x along a RIGHT or DOWN letter, for 1 <= x <= N."""
    N = params.N
    if not 1 <= x <= N:
        raise ValueError("step index must lie in 1..N")
    direction = str(direction).upper()
    if direction not in (RIGHT, DOWN):
        raise ValueError("direction must be RIGHT or DOWN")
    a = params.alphas[x - 1]
    hi, lo = (mu, lam) if direction == RIGHT else (lam, mu)
    d = _doob(params)
    psi = math.exp(log_baxter(a, hi[0], hi[1], lo[0], lo[1]) - 2 * math.lgamma(a))
    return psi * d.H(x, _gap(mu)) / d.H(x - 1, _gap(lam))


# ---------------------------------------------------------------------------
# MCMC
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainConfig:
    n_chains: int = 32
    burn_in: int = 4000
    n_samples: int = 1000
    thin: int = 10
    target_accept: float = 0.3
    adapt_every: int = 100
    ess_floor: float = 0.0

    def __post_init__(self):
        if self.n_chains < 2 or self.n_samples < 1 or self.thin < 1 or self.burn_in < 0:
            raise ValueError("invalid chain configuration")
        if not 0 < self.target_accept < 1:
            raise ValueError("target_accept must lie in (0, 1)")


@dataclass
class McmcResult:
    paths: np.ndarray  # (n_chains * n_samples, N+1, 2)
    chains: np.ndarray  # (n_chains, n_samples, 2N+1) free coordinates
    acceptance: float
    scale: float
    tau: float
    ess: float
    flagged: bool

    def estimate(self, f) -> McEstimate:
        """Mean of f(paths) with the chain-based standard error."""
        vals = np.asarray(f(self.paths), dtype=float).reshape(self.chains.shape[:2])
        tau = integrated_autocorr_time(vals)
        n = vals.size
        ess = n / tau
        se = float(vals.std(ddof=1) / math.sqrt(ess))
        return McEstimate(float(vals.mean()), se, n, ess, self.flagged)


def _to_paths(theta, N):
    shape = theta.shape[:-1]
    out = np.zeros(shape + (N + 1, 2))
    out[..., 0, 0] = theta[..., 0]
    out[..., 1:, :] = theta[..., 1:].reshape(shape + (N, 2))
    return out


def sample_twolayer_lg_mcmc(params: LGParams, seed, config: ChainConfig | None = None) -> McmcResult:
    """Random-walk Metropolis on the 2N+1 free coordinates of the horizontal path.

    All chains move in parallel.  During burn-in the proposal covariance is
    re-estimated from the pooled chain states and its global scale follows a
    Robbins-Monro rule toward the target acceptance rate.
    """
    config = config or ChainConfig()
    if params.u + params.v <= 0:
        raise ParameterError("u + v > 0 is required for a normalizable density")
    N = params.N
    d = 2 * N + 1
    rng = np.random.default_rng(seed)

    def logp(theta):
        return twolayer_logdensity_lg(_to_paths(theta, N), params)

    theta = 0.1 * rng.standard_normal((config.n_chains, d))
    cur = logp(theta)
    chol = np.eye(d)
    log_scale = math.log(2.38 / math.sqrt(d))
    history = []
    acc = 0
    chol_fixed = False
    for it in range(config.burn_in):
        prop = theta + math.exp(log_scale) * rng.standard_normal(theta.shape) @ chol.T
        new = logp(prop)
        ok = np.log(rng.random(config.n_chains)) < new - cur
        theta[ok] = prop[ok]
        cur[ok] = new[ok]
        acc += ok.mean()
        history.append(theta.copy())
        if (it + 1) % config.adapt_every == 0:
            rate = acc / config.adapt_every
            log_scale += (rate - config.target_accept) * 2.0
            acc = 0
            if it + 1 >= config.burn_in // 4:
                pooled = np.concatenate(history[-config.adapt_every * 4:])
                cov = np.cov(pooled.T) + 1e-8 * np.eye(d)
                try:
                    new_chol = np.linalg.cholesky(cov)
                except np.linalg.LinAlgError:
                    new_chol = None
                if new_chol is not None:
                    if chol_fixed is False:
                        # the identity guess had its own scale; restart from the optimal one
                        log_scale = math.log(2.38 / math.sqrt(d))
                        chol_fixed = True
                    chol = new_chol
            history = history[-config.adapt_every * 4:]
    scale = math.exp(log_scale)
    if not np.isfinite(scale) or scale < 1e-8:
        raise ArithmeticError("degenerate proposal scale")
    draws = np.empty((config.n_chains, config.n_samples, d))
    accepted = 0
    total = config.n_samples * config.thin
    for s in range(total):
        prop = theta + scale * rng.standard_normal(theta.shape) @ chol.T
        new = logp(prop)
        ok = np.log(rng.random(config.n_chains)) < new - cur
        theta[ok] = prop[ok]
        cur[ok] = new[ok]
        accepted += ok.sum()
        if (s + 1) % config.thin == 0:
            draws[:, (s + 1) // config.thin - 1] = theta
    acceptance = accepted / (total * config.n_chains)
    tau = max(integrated_autocorr_time(draws[:, :, k]) for k in range(d))
    n = config.n_chains * config.n_samples
    ess = n / tau
    return McmcResult(
        paths=_to_paths(draws.reshape(n, d), N),
        chains=draws,
        acceptance=float(acceptance),
        scale=scale,
        tau=float(tau),
        ess=float(ess),
        flagged=bool(ess < config.ess_floor),
    )


# ---------------------------------------------------------------------------
# importance sampling
# ---------------------------------------------------------------------------


@dataclass
class ISResult:
    L1: np.ndarray
    L2: np.ndarray
    logw: np.ndarray
    log_reference: np.ndarray
    ess_floor: float = 0.0

    @property
    def log_target(self):
        """Unnormalized walk-measure log-density of each draw."""
        return self.logw + self.log_reference

    @property
    def ess(self) -> float:
        w = np.exp(self.logw - self.logw.max())
        return float(w.sum() ** 2 / (w * w).sum())

    def estimate(self, f) -> McEstimate:
        return snis_estimate(self.logw, f(self.L1, self.L2), self.ess_floor)


def importance_sample_lg(params: LGParams, seed, count: int, ess_floor: float = 0.0) -> ISResult:
    """Reference log-gamma walks reweighted by exp((u+v) (L1 (x) L2)(N)).

    Increments are -log Gamma(theta) with theta = alpha_i + v for L1 and
    alpha_i + u for L2; such an increment has density
    exp(-theta x - e^{-x}) / Gamma(theta).
    """
    if params.u + params.v <= 0:
        raise ParameterError("u + v > 0 is required")
    N = params.N
    al = np.asarray(params.rates(N))
    rng = np.random.default_rng(seed)
    t1 = al + params.v
    t2 = al + params.u
    d1 = -np.log(rng.gamma(t1, size=(count, N)))
    d2 = -np.log(rng.gamma(t2, size=(count, N)))
    L1 = np.zeros((count, N + 1))
    L2 = np.zeros((count, N + 1))
    L1[:, 1:] = np.cumsum(d1, axis=1)
    L2[:, 1:] = np.cumsum(d2, axis=1)
    ref = np.zeros(count)
    for th, dd in ((t1, d1), (t2, d2)):
        ref += (-np.array([math.lgamma(x) for x in th]) - th * dd - np.exp(-dd)).sum(axis=1)
    logw = (params.u + params.v) * pitman_lg(L1, L2)[:, -1]
    return ISResult(L1, L2, logw, ref, ess_floor)


# ---------------------------------------------------------------------------
# N -> infinity limits
# ---------------------------------------------------------------------------


def limit_doob_lg(l, params: LGParams):
    """H(l) = 2 K_0(2 e^{-l/2}) / Gamma(u)^2."""
    if not params.is_homogeneous:
        raise ParameterError("the limit objects need homogeneous bulk parameters")
    if not params.v > 0:
        raise ParameterError("the limit needs v > 0")
    l = np.asarray(l, dtype=float)
    k0 = np.real(bessel_k(0.0, 2.0 * np.exp(-0.5 * l)))
    return 2.0 * k0 / math.gamma(params.u) ** 2


def limit_kernel_lg(lam, mu, params: LGParams) -> float:
    """Psi_alpha(mu/lambda) / Gamma(alpha)^2 * H(mu_1 - mu_2) / H(lambda_1 - lambda_2)."""
    a = params.alphas[0]
    h = limit_doob_lg([_gap(mu), _gap(lam)], params)
    psi = math.exp(log_baxter(a, mu[0], mu[1], lam[0], lam[1]) - 2 * math.lgamma(a))
    return float(psi * h[0] / h[1])
