"""gl_2 Whittaker functions, Baxter kernels and the identities they satisfy.

Two-variable Whittaker functions are evaluated through the Bessel form
Psi_{z1,z2}(x1,x2) = 2 exp(-(z1+z2)(x1+x2)/2) K_{z1-z2}(2 exp(-(x1-x2)/2)).
Integrals over R^2 are done with a tensor trapezoid rule on a box found from
the log-integrand (everything in log space; exp(-e^x) under/overflows fast).
Most plane integrals are written in the coordinates s = x1 + x2, d = x1 - x2
(dx1 dx2 = ds dd / 2) so Bessel factors depend on one axis only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .numerics import (
    ContourSpec,
    NonConvergenceError,
    gamma,
    integrate_vertical,
    log_bessel_k,
    log_gamma,
    rgamma,
)

__all__ = [
    "psi2",
    "log_psi2",
    "psi2_dual",
    "log_baxter",
    "baxter_kernel",
    "log_baxter_general",
    "psi_givental",
    "skew_whittaker",
    "delta_whittaker",
    "WhittakerCheck",
    "verify_cauchy_whittaker",
    "verify_littlewood_whittaker",
    "verify_grsk_sum",
    "verify_mellin_n1",
    "verify_baxter_eigen",
    "integrate_line_log",
    "integrate_plane_log",
]


# ---------------------------------------------------------------------------
# log-space quadrature on R and R^2
# ---------------------------------------------------------------------------


def integrate_line_log(logf: Callable, center: float = 0.0, rel_tol: float = 1e-12,
                       span: float = 40.0, drop: float = 45.0):
    """int_R exp(logf(t)) dt for a smooth, fast-decaying integrand."""
    step = 0.25
    for _ in range(8):
        t = center + np.arange(-span, span + step, step)
        lv = np.real(logf(t))
        top = np.max(lv)
        keep = np.nonzero(lv > top - drop)[0]
        if keep[0] > 0 and keep[-1] < len(t) - 1:
            break
        span *= 2
    else:
        raise NonConvergenceError("integrand does not decay inside the search window")
    lo, hi = t[keep[0]] - 2 * step, t[keep[-1]] + 2 * step

    def trap(h):
        nodes = np.arange(lo, hi + h, h)
        return h * np.exp(logf(nodes) - top).sum()

    h = 0.25
    prev = trap(h)
    while True:
        h *= 0.5
        cur = trap(h)
        if abs(cur - prev) <= rel_tol * abs(cur) or h < 1e-4:
            return complex(cur * np.exp(top))
        prev = cur


def integrate_plane_log(logf: Callable, center=(0.0, 0.0), rel_tol: float = 1e-8,
                        span: float = 30.0, drop: float = 45.0, h_min: float = 1.0 / 64):
    """int_{R^2} exp(logf(u, v)) du dv.

    ``logf`` receives two 1D node arrays and returns the 2D array of log
    values on their tensor grid.  A coarse scan locates the box where the
    integrand exceeds exp(-drop) times its maximum; the trapezoid step is then
    halved until the relative change is below ``rel_tol``.
    """
    cu, cv = center
    step = 0.5
    for _ in range(6):
        u = cu + np.arange(-span, span + step, step)
        v = cv + np.arange(-span, span + step, step)
        lv = np.real(logf(u, v))
        top = np.max(lv)
        iu, iv = np.nonzero(lv > top - drop)
        if iu.min() > 0 and iu.max() < len(u) - 1 and iv.min() > 0 and iv.max() < len(v) - 1:
            break
        cu, cv = u[iu[np.argmax(lv[iu, iv])]], v[iv[np.argmax(lv[iu, iv])]]
        span *= 2
    else:
        raise NonConvergenceError("plane integrand does not decay inside the search window")
    ulo, uhi = u[iu.min()] - 2 * step, u[iu.max()] + 2 * step
    vlo, vhi = v[iv.min()] - 2 * step, v[iv.max()] + 2 * step

    def trap(h):
        un = np.arange(ulo, uhi + h, h)
        vn = np.arange(vlo, vhi + h, h)
        return h * h * np.exp(logf(un, vn) - top).sum()

    h = 0.25
    prev = trap(h)
    history = []
    while True:
        h *= 0.5
        cur = trap(h)
        history.append(abs(cur - prev))
        if abs(cur - prev) <= rel_tol * abs(cur) or h <= h_min:
            return complex(cur * np.exp(top)), history
        prev = cur


# ---------------------------------------------------------------------------
# Whittaker functions and kernels
# ---------------------------------------------------------------------------


def log_psi2(z1, z2, x1, x2):
    """log Psi_{z1,z2}(x1, x2) via the Bessel form (vectorized in x)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    arg = 2.0 * np.exp(-(x1 - x2) / 2.0)
    return math.log(2.0) - (z1 + z2) * (x1 + x2) / 2.0 + log_bessel_k(z1 - z2, arg)


def psi2(z1, z2, x1, x2):
    """Psi_{z1,z2}(x1, x2) = 2 e^{-(z1+z2)(x1+x2)/2} K_{z1-z2}(2 e^{-(x1-x2)/2})."""
    out = np.exp(log_psi2(z1, z2, x1, x2))
    return complex(out) if np.ndim(out) == 0 else out


def psi2_dual(z1, z2, x1, x2):
    """Dual Whittaker function e^{-e^{-x2}} Psi_z(x)."""
    return psi2(z1, z2, x1, x2) * np.exp(-np.exp(-np.asarray(x2, dtype=float)))


def log_baxter(alpha, x1, x2, y1, y2):
    """log Psi^{(2)}_alpha(x/y), vectorized."""
    return (
        -alpha * (x1 + x2 - y1 - y2)
        - np.exp(-(x1 - y1))
        - np.exp(-(x2 - y2))
        - np.exp(-(y1 - x2))
    )


def baxter_kernel(alpha, x: Sequence[float], y: Sequence[float]):
    """Psi^{(2)}_alpha(x/y) = exp(-alpha sum(x-y) - e^{-(x1-y1)} - e^{-(x2-y2)} - e^{-(y1-x2)})."""
    val = np.exp(log_baxter(alpha, x[0], x[1], y[0], y[1]))
    return float(val) if np.isrealobj(val) else complex(val)


def log_baxter_general(alpha, x: Sequence[float], y: Sequence[float]):
    """log Psi^{(n,n-1)}_alpha(x/y) for len(x) = n, len(y) = n - 1."""
    x = [np.asarray(v, dtype=float) for v in x]
    y = [np.asarray(v, dtype=float) for v in y]
    n = len(x)
    if len(y) != n - 1:
        raise ValueError("need len(y) = len(x) - 1")
    out = -alpha * (sum(x) - (sum(y) if y else 0.0))
    for i in range(n - 1):
        out = out - np.exp(-(x[i] - y[i])) - np.exp(-(y[i] - x[i + 1]))
    return out


def psi_givental(alphas: Sequence[complex], x: Sequence[float], rel_tol: float = 1e-12):
    """Givental integral Psi_alpha(x) for n = len(alphas) <= 3.

    n = 1: e^{-alpha x}.  n = 2: the one-dimensional integral over the middle
    row of the triangular array, done directly in log space.  n = 3: the
    two-dimensional integral over the second row, with the n = 2 layer taken
    from the Bessel form (itself checked against the n = 2 Givental integral).
    """
    n = len(alphas)
    if len(x) != n:
        raise ValueError("need len(x) = len(alphas)")
    if n == 1:
        return complex(np.exp(-alphas[0] * x[0]))
    if n == 2:
        a1, a2 = alphas
        x1, x2 = x

        def logf(y):
            return -a1 * y + log_baxter_general(a2, (x1, x2), (y,))

        return integrate_line_log(logf, center=0.5 * (x1 + x2), rel_tol=rel_tol)
    if n == 3:
        a1, a2, a3 = alphas

        def logf(u, v):
            y1, y2 = u[:, None], v[None, :]
            y1b, y2b = np.broadcast_arrays(y1, y2)
            inner = np.where(
                y1b - y2b > -60, log_psi2(a1, a2, np.maximum(y1b, y2b - 60), y2b), -np.inf
            )
            return inner + log_baxter_general(a3, x, (y1b, y2b))

        val, _ = integrate_plane_log(logf, center=(x[0], x[2]), rel_tol=1e-7)
        return val
    raise ValueError("psi_givental supports n <= 3")


def skew_whittaker(alphas: Sequence[complex], x: Sequence[float], y: Sequence[float],
                   rel_tol: float = 1e-9):
    """Psi^{(2)}_{alpha_1..alpha_k}(x/y) by the branching rule (k <= 2 tested).

    k = 2: int Psi_{alpha_2}(x/w) Psi_{alpha_1}(w/y) dw over R^2.
    """
    k = len(alphas)
    if k == 0:
        raise ValueError("need at least one spectral parameter")
    if k == 1:
        return baxter_kernel(alphas[0], x, y)
    if k > 2:
        raise ValueError("skew_whittaker is implemented for k <= 2")
    a1, a2 = alphas

    def logf(u, v):
        w1, w2 = u[:, None], v[None, :]
        return log_baxter(a2, x[0], x[1], w1, w2) + log_baxter(a1, w1, w2, y[0], y[1])

    centre = (0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1]))
    val, _ = integrate_plane_log(logf, center=centre, rel_tol=rel_tol)
    return val.real if abs(val.imag) <= 1e-12 * abs(val) else val


def delta_whittaker(z: Sequence[complex]) -> complex:
    """Delta(z) = (1/2) prod_{i != j} 1/Gamma(z_i - z_j) for n = 2."""
    z1, z2 = z
    return 0.5 * complex(rgamma(z1 - z2)) * complex(rgamma(z2 - z1))


# ---------------------------------------------------------------------------
# Verifiers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WhittakerCheck:
    name: str
    lhs: complex
    rhs: complex
    gap: float
    history: tuple = ()

    def passed(self, tol: float) -> bool:
        return self.gap <= tol


def _rel_gap(lhs, rhs):
    return float(abs(lhs - rhs) / abs(rhs))


def _sd_logf(term: Callable):
    """Wrap f(s, d) (broadcast 2D) as a tensor-grid log-integrand incl. Jacobian 1/2."""

    def logf(s, d):
        return term(s[:, None], d[None, :]) + math.log(0.5)

    return logf


def verify_cauchy_whittaker(n: int, alphas, betas, rel_tol: float = 1e-9) -> WhittakerCheck:
    """int Psi_alpha(x) Psi*_beta(x) dx = prod Gamma(alpha_i + beta_j)."""
    if n == 1:
        (a,), (b,) = alphas, betas
        if (a + b).real <= 0:
            raise ValueError("need Re(alpha + beta) > 0")
        lhs = integrate_line_log(lambda x: -(a + b) * x - np.exp(-x), rel_tol=1e-13)
        rhs = complex(gamma(a + b))
        return WhittakerCheck("cauchy_n1", lhs, rhs, _rel_gap(lhs, rhs))
    if n != 2:
        raise ValueError("n must be 1 or 2")
    a1, a2 = alphas
    b1, b2 = betas
    if min((ai + bj).real for ai in alphas for bj in betas) <= 0:
        raise ValueError("need Re(alpha_i + beta_j) > 0")
    A, B = a1 + a2, b1 + b2

    def term(s, d):
        arg = 2.0 * np.exp(-d / 2.0)
        return (
            2 * math.log(2.0)
            - (A + B) * s / 2.0
            + log_bessel_k(a1 - a2, arg)
            + log_bessel_k(b1 - b2, arg)
            - np.exp(-(s - d) / 2.0)
        )

    lhs, hist = integrate_plane_log(_sd_logf(term), rel_tol=rel_tol)
    rhs = complex(np.prod([gamma(ai + bj) for ai in alphas for bj in betas]))
    return WhittakerCheck("cauchy_n2", lhs, rhs, _rel_gap(lhs, rhs), tuple(hist))


def verify_littlewood_whittaker(alphas, u: float, s: float, rel_tol: float = 1e-9) -> WhittakerCheck:
    """int Psi_alpha(x) e^{-s e^{-x2}} e^{-u(x1-x2)} dx
    = s^{-a1-a2} Gamma(a1+u) Gamma(a2+u) Gamma(a1+a2)."""
    a1, a2 = alphas
    if s <= 0 or (a1 + a2).real <= 0 or (a1 + u).real <= 0 or (a2 + u).real <= 0:
        raise ValueError("Littlewood integral diverges for these parameters")
    A = a1 + a2
    ls = math.log(s)

    def term(sig, d):
        arg = 2.0 * np.exp(-d / 2.0)
        return (
            math.log(2.0)
            - A * sig / 2.0
            + log_bessel_k(a1 - a2, arg)
            - np.exp(ls - (sig - d) / 2.0)
            - u * d
        )

    lhs, hist = integrate_plane_log(_sd_logf(term), rel_tol=rel_tol)
    rhs = complex(np.exp(-A * ls + log_gamma(a1 + u) + log_gamma(a2 + u) + log_gamma(A)))
    return WhittakerCheck("littlewood", lhs, rhs, _rel_gap(lhs, rhs), tuple(hist))


def verify_grsk_sum(alphas, betas, u: float, s: float, rel_tol: float = 1e-9) -> WhittakerCheck:
    """int Psi_alpha Psi_beta e^{-s e^{-x2}} e^{-u(x1-x2)} dx
    = s^{-S} Gamma(S)/Gamma(S+2u) prod Gamma(alpha_i+beta_j+u), S = sum alpha + sum beta."""
    a1, a2 = alphas
    b1, b2 = betas
    S = a1 + a2 + b1 + b2
    if S.real <= 0 or min((ai + bj + u).real for ai in alphas for bj in betas) <= 0:
        raise ValueError("geometric RSK integral diverges for these parameters")
    ls = math.log(s)

    def term(sig, d):
        arg = 2.0 * np.exp(-d / 2.0)
        return (
            2 * math.log(2.0)
            - S * sig / 2.0
            + log_bessel_k(a1 - a2, arg)
            + log_bessel_k(b1 - b2, arg)
            - np.exp(ls - (sig - d) / 2.0)
            - u * d
        )

    lhs, hist = integrate_plane_log(_sd_logf(term), rel_tol=rel_tol)
    logr = -S * ls + log_gamma(S) - log_gamma(S + 2 * u)
    logr += sum(log_gamma(ai + bj + u) for ai in alphas for bj in betas)
    rhs = complex(np.exp(logr))
    return WhittakerCheck("grsk_sum", lhs, rhs, _rel_gap(lhs, rhs), tuple(hist))


def verify_baxter_eigen(alpha, z, y, rel_tol: float = 1e-9) -> WhittakerCheck:
    """int Psi^{(2)}_alpha(x/y) Psi_z(x) dx = Psi_z(y) Gamma(alpha+z1) Gamma(alpha+z2)."""
    z1, z2 = z
    y1, y2 = y

    def term(s, d):
        x1, x2 = (s + d) / 2.0, (s - d) / 2.0
        lpsi = math.log(2.0) - (z1 + z2) * s / 2.0 + log_bessel_k(z1 - z2, 2.0 * np.exp(-d / 2.0))
        return log_baxter(alpha, x1, x2, y1, y2) + lpsi

    lhs, hist = integrate_plane_log(_sd_logf(term), center=(y1 + y2, y1 - y2), rel_tol=rel_tol)
    rhs = complex(psi2(z1, z2, y1, y2) * gamma(alpha + z1) * gamma(alpha + z2))
    return WhittakerCheck("baxter_eigen", lhs, rhs, _rel_gap(lhs, rhs), tuple(hist))


def verify_mellin_n1(alpha: complex, d: float, eta: float = 0.0, rel_tol: float = 1e-12) -> WhittakerCheck:
    """int_{eta + iR} Gamma(alpha+z) t^z dz/(2 pi i) = t^{-alpha} e^{-1/t}, t = e^d."""
    if (alpha + eta).real <= 0:
        raise ValueError("contour must lie right of the poles: Re(alpha + eta) > 0")

    def f(z):
        return np.exp(np.asarray(log_gamma(alpha + z)) + z * d)

    spec = ContourSpec.vertical(real_part=eta, decay_rate=math.pi / 2, rel_tol=rel_tol)
    lhs = integrate_vertical(f, spec, decay_rate=math.pi / 2).require().value
    rhs = complex(np.exp(-alpha * d - np.exp(-d)))
    return WhittakerCheck("mellin_n1", lhs, rhs, _rel_gap(lhs, rhs))
