"""Open KPZ: the normalization Z_{u,v}(L), the growth rate c_{u,v}(L) and its phases.

Z_{u,v}(L) = (1/2 pi i) int_{iR} Gamma(u+-z) Gamma(v+-z) e^{z^2 L} / (2 Gamma(+-2z)) dz.

The primitive quantity is Ztilde = Z / Gamma(u+v), which stays finite on
u + v = 0.  Outside u, v > 0 the integral is continued: a vertical line
Re z = sigma plus the residues at +-(p+i), p in {u, v}, that lie on the wrong
side of it.  Each residue carries Gamma(u+v+i) = Gamma(u+v) (u+v)_i, so the
division by Gamma(u+v) is done analytically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from .mc import McEstimate
from .numerics import (
    ContourSpec,
    gamma,
    integrate_vertical,
    log_gamma,
    rgamma,
    rgamma_pm2z,
)
from .params import KpzParams, ParameterError

__all__ = [
    "z_kpz",
    "z_kpz_full",
    "c_uv",
    "phase_limit",
    "phase_scan",
    "brownian_k_mc",
    "brownian_k_refinement",
    "brownian_ztilde_mc",
    "KpzValue",
]

# perturbation used when u - v is an integer (colliding pole families)
COLLISION_DELTA = 1e-4


@dataclass(frozen=True)
class KpzValue:
    """Ztilde = scaled * e^{scale_exp}; dZ is the L-derivative with the same scale."""

    scaled: float
    d_scaled: float
    scale_exp: float

    @property
    def value(self) -> float:
        return self.scaled * math.exp(self.scale_exp)

    @property
    def log_derivative(self) -> float:
        return self.d_scaled / self.scaled


def _choose_sigma(u, v):
    """Smallest |sigma| keeping the line at least 0.1 (or as far as possible) from poles.

    |e^{z^2 L}| = e^{(sigma^2 - y^2) L} on the line, so a line far from 0
    costs e^{sigma^2 L} in cancellation; staying close to 0 matters at large L.
    """
    cands = np.linspace(-0.45, 0.45, 181)
    locs = []
    for p in (u, v):
        for i in range(0, 200):
            if abs(p + i) > 60:
                break
            locs += [p + i, -(p + i)]
    locs = np.array(locs)
    dist = np.array([np.min(np.abs(locs - c)) for c in cands])
    need = min(0.1, dist.max())
    ok = cands[dist >= need - 1e-12]
    return float(ok[np.argmin(np.abs(ok))])


class _Collision(ParameterError):
    pass


def _residues(p, q, sigma, L):
    """Crossed poles of the p-family and their Ztilde contributions (without e^{z^2 L}).

    Left poles -(p+i) with -(p+i) > sigma enter with +Res, right poles p+i with
    p+i < sigma with -Res; both contribute
    (-1)^i/i! Gamma(2p+i) Gamma(q-p-i) (p+q)_i / (2 Gamma(+-2(p+i))).
    Gamma(2p+i) / Gamma(+-2z) is combined into the entire
    -2 (p+i) (-1)^i / Gamma(1-2p-i).
    """
    out = []
    for i in range(0, 400):
        w = p + i
        crossed = int(-w > sigma) + int(w < sigma)
        if not crossed:
            if w > abs(sigma) + 1:
                break
            continue
        coeff = (-1) ** i * math.exp(-math.lgamma(i + 1))
        g = -2.0 * w * (-1) ** i * float(np.real(rgamma(1 - 2 * p - i)))
        x = q - p - i
        if x < 0.5 and abs(x - round(x)) < 1e-6:
            # a crossed pole of one family sits on a pole of the other
            raise _Collision("colliding pole families (u - v integer)")
        other = float(np.real(gamma(x)))
        rising = math.prod(p + q + k for k in range(i))
        val = crossed * coeff * g * other * rising / 2.0
        out.append((w, val))
    return out


def _z_parts(u, v, L, rel_tol):
    sigma = _choose_sigma(u, v)
    res = _residues(u, v, sigma, L) + _residues(v, u, sigma, L)
    scale = max([sigma * sigma] + [w * w for w, val in res if val != 0])
    ruv = float(np.real(rgamma(u + v)))

    def integrand(z, power):
        lg = log_gamma(u + z) + log_gamma(u - z) + log_gamma(v + z) + log_gamma(v - z)
        f = np.exp(lg + (z * z - scale) * L) * rgamma_pm2z(z) / 2.0
        return f * z**power if power else f

    height = math.sqrt((-math.log(rel_tol) + 5.0 + sigma * sigma * L) / L) + 2.0
    rate = (-math.log(rel_tol) + 5.0) / height
    spec = ContourSpec.vertical(sigma, half_height=height, rel_tol=rel_tol)
    vals = []
    for power in (0, 2):
        if ruv == 0.0:
            line = 0.0
        else:
            r = integrate_vertical(lambda z: integrand(z, power), spec, decay_rate=rate).require()
            line = r.value.real * ruv
        corr = sum(val * w**power * math.exp((w * w - scale) * L) for w, val in res)
        vals.append(line + corr)
    return KpzValue(vals[0], vals[1], scale * L)


def z_kpz_full(params: KpzParams, rel_tol: float = 1e-12) -> KpzValue:
    """Ztilde and its L-derivative with an explicit exponential scale."""
    u, v, L = float(params.u), float(params.v), float(params.L)
    try:
        return _z_parts(u, v, L, rel_tol)
    except _Collision:
        # a crossed double pole: the value is smooth in (u, v), so average the
        # two symmetric perturbations (error O(delta^2))
        a = _z_parts(u + COLLISION_DELTA, v - COLLISION_DELTA, L, rel_tol)
        b = _z_parts(u - COLLISION_DELTA, v + COLLISION_DELTA, L, rel_tol)
        s = max(a.scale_exp, b.scale_exp)
        fa, fb = math.exp(a.scale_exp - s), math.exp(b.scale_exp - s)
        return KpzValue(0.5 * (a.scaled * fa + b.scaled * fb),
                        0.5 * (a.d_scaled * fa + b.d_scaled * fb), s)


def z_kpz(params: KpzParams, rel_tol: float = 1e-12) -> float:
    """Ztilde_{u,v}(L) = Z_{u,v}(L) / Gamma(u+v) (continued outside u, v > 0)."""
    return z_kpz_full(params, rel_tol).value


def c_uv(params: KpzParams, rel_tol: float = 1e-12) -> float:
    """c_{u,v}(L) = -1/24 + (1/2) d/dL log Ztilde_{u,v}(L)."""
    z = z_kpz_full(params, rel_tol)
    return -1.0 / 24.0 + 0.5 * z.log_derivative


def phase_limit(u: float, v: float) -> float:
    """Large-L limit of c_{u,v}: maximal current, low-density and high-density phases."""
    m = min(u, v)
    if m >= 0:
        return -1.0 / 24.0
    return -1.0 / 24.0 + m * m / 2.0


def phase_scan(grid, L_list, rel_tol: float = 1e-12) -> list[dict]:
    """Rows (u, v, L, c_uv, phase_limit, gap) for every (u, v) in grid and L in L_list."""
    rows = []
    for u, v in grid:
        lim = phase_limit(u, v)
        for L in L_list:
            c = c_uv(KpzParams(u, v, L), rel_tol)
            rows.append({"u": u, "v": v, "L": L, "c_uv": c, "phase_limit": lim, "gap": c - lim})
    return rows


# ---------------------------------------------------------------------------
# Brownian Monte Carlo for the normalization relation
# ---------------------------------------------------------------------------


def _k_functional(b1, b2, dt, weight):
    # int_0^L exp(-(B1(s) + B2(L) - B2(s))) ds by the trapezoid rule
    e = np.exp(-(b1 + b2[:, -1:] - b2))
    integral = dt * (e.sum(axis=1) - 0.5 * (e[:, 0] + e[:, -1]))
    return integral**weight


def brownian_k_mc(u: float, v: float, L: float, steps: int | None = None, samples: int = 100_000,
                  seed=0, extrapolate: bool = False, chunk: int = 2000) -> McEstimate:
    """E[(int_0^L e^{-(B1(s) + B2(L) - B2(s))} ds)^{-u-v}] from discretized Brownian pairs.

    Each pair is used with its antithetic mirror.  The trapezoid functional has
    a second-order discretization bias (see brownian_k_refinement); with
    ``extrapolate`` the estimator is the Richardson combination
    (4 K(steps) - K(steps/2)) / 3 on the same paths.
    """
    if u + v <= 0:
        raise ParameterError("need u + v > 0 for the moment to exist")
    steps = int(steps if steps is not None else max(1000, round(1000 * L)))
    if steps < 1000:
        raise ParameterError("need at least 1000 steps")
    if extrapolate and steps % 2:
        steps += 1
    dt = L / steps
    rng = np.random.default_rng(seed)
    out = []
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        inc = rng.standard_normal((2, n, steps)) * math.sqrt(dt)
        b = np.zeros((2, n, steps + 1))
        np.cumsum(inc, axis=2, out=b[:, :, 1:])
        vals = []
        for sgn in (1.0, -1.0):
            fine = _k_functional(sgn * b[0], sgn * b[1], dt, -(u + v))
            if extrapolate:
                coarse = _k_functional(sgn * b[0][:, ::2], sgn * b[1][:, ::2], 2 * dt, -(u + v))
                fine = (4 * fine - coarse) / 3
            vals.append(fine)
        out.append(0.5 * (vals[0] + vals[1]))
        done += n
    x = np.concatenate(out)
    return McEstimate(float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x))), len(x), float(len(x)))


def brownian_ztilde_mc(u: float, v: float, L: float, steps: int | None = None, samples: int = 100_000,
                       seed=0, chunk: int = 2000) -> McEstimate:
    """Ztilde_{u,v}(L) from Brownian paths, valid for all u + v > 0.

    Integrating out Lambda_1(0) - Lambda_2(0) and moving the boundary weight
    e^{-v D(L)}, D = B1 - B2, into a drift gives
    Ztilde = e^{v^2 L} E[(int_0^L e^{-D(s)} ds)^{-u-v}] with D a Brownian
    motion of variance 2 and drift -2v.  For u = v this coincides with
    e^{-L(u^2+v^2)/2} times the K functional of :func:`brownian_k_mc`.
    Antithetic pairs flip the noise only.
    """
    if u + v <= 0:
        raise ParameterError("need u + v > 0 for the moment to exist")
    steps = int(steps if steps is not None else max(1000, round(1000 * L)))
    if steps < 1000:
        raise ParameterError("need at least 1000 steps")
    dt = L / steps
    drift = -2 * v * dt * np.arange(steps + 1)
    rng = np.random.default_rng(seed)
    out = []
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        w = np.zeros((n, steps + 1))
        np.cumsum(rng.standard_normal((n, steps)) * math.sqrt(2 * dt), axis=1, out=w[:, 1:])
        vals = []
        for sgn in (1.0, -1.0):
            e = np.exp(-(sgn * w + drift))
            integral = dt * (e.sum(axis=1) - 0.5 * (e[:, 0] + e[:, -1]))
            vals.append(integral ** (-(u + v)))
        out.append(0.5 * (vals[0] + vals[1]))
        done += n
    x = np.concatenate(out) * math.exp(v * v * L)
    return McEstimate(float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x))), len(x), float(len(x)))


def brownian_k_refinement(u: float, v: float, L: float, steps: int = 1024, levels: int = 3,
                          samples: int = 20_000, seed=0, chunk: int = 1000):
    """Coupled estimates of the K functional at steps, steps/2, ..., steps/2^(levels-1).

    All levels use the same finest paths, so differences between levels have
    small variance and expose the discretization bias.  Returns a list of
    (steps, mean, stderr) and the successive differences with their stderrs.
    """
    if u + v <= 0:
        raise ParameterError("need u + v > 0 for the moment to exist")
    if steps % (1 << (levels - 1)):
        raise ValueError("steps must be divisible by 2^(levels-1)")
    dt = L / steps
    rng = np.random.default_rng(seed)
    per_level = [[] for _ in range(levels)]
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        inc = rng.standard_normal((2, n, steps)) * math.sqrt(dt)
        b = np.zeros((2, n, steps + 1))
        np.cumsum(inc, axis=2, out=b[:, :, 1:])
        for k in range(levels):
            st = 1 << k
            vals = 0.5 * sum(
                _k_functional(sg * b[0][:, ::st], sg * b[1][:, ::st], dt * st, -(u + v))
                for sg in (1.0, -1.0)
            )
            per_level[k].append(vals)
        done += n
    arrs = [np.concatenate(x) for x in per_level]
    n = len(arrs[0])
    table = [(steps >> k, float(a.mean()), float(a.std(ddof=1) / math.sqrt(n))) for k, a in enumerate(arrs)]
    diffs = []
    for k in range(levels - 1):
        d = arrs[k + 1] - arrs[k]
        diffs.append((float(d.mean()), float(d.std(ddof=1) / math.sqrt(n))))
    return table, diffs
