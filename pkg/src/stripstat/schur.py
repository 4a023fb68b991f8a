"""Schur and skew Schur polynomials of small signatures, and identity checks.

Scalar routines are written with plain Python arithmetic so they accept
``fractions.Fraction`` and ``int`` inputs and then compute exactly; floats and
complex numbers work as well.  The verifiers return truncated sums together
with an explicit bound on the neglected tail.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

__all__ = [
    "as_signature",
    "interlaces",
    "schur_value",
    "skew_schur_value",
    "skew_schur_contour",
    "IdentityCheck",
    "verify_cauchy",
    "verify_littlewood",
    "verify_rsk_sum",
    "verify_signature_identities",
]


def as_signature(parts: Sequence[int], nonnegative: bool = False) -> tuple[int, ...]:
    lam = tuple(int(p) for p in parts)
    if not lam:
        raise ValueError("a signature needs at least one part")
    if any(p != q for p, q in zip(lam, parts)):
        raise ValueError("signature parts must be integers")
    if any(lam[i] < lam[i + 1] for i in range(len(lam) - 1)):
        raise ValueError(f"signature {lam} is not weakly decreasing")
    if nonnegative and lam[-1] < 0:
        raise ValueError(f"signature {lam} has negative parts")
    return lam


def interlaces(lam: Sequence[int], mu: Sequence[int]) -> bool:
    """lambda < mu in the interlacing order: mu_1 >= lam_1 >= mu_2 >= lam_2 >= ..."""
    if len(lam) != len(mu):
        raise ValueError("interlacing needs signatures of equal length")
    n = len(mu)
    for i in range(n):
        if lam[i] > mu[i]:
            return False
        if i + 1 < n and lam[i] < mu[i + 1]:
            return False
    return True


def _power(x, k):
    return x**k if k >= 0 else 1 / x ** (-k)


def _h(m: int, x1, x2):
    """Complete homogeneous h_m(x1, x2), stable when x1 is close to x2."""
    if m < 0:
        return 0 * x1
    exact = isinstance(x1, (int, Fraction)) and isinstance(x2, (int, Fraction))
    if exact and x1 != x2:
        return Fraction(x1 ** (m + 1) - x2 ** (m + 1)) / (x1 - x2)
    scale = max(abs(x1), abs(x2))
    if not exact and scale > 0 and abs(x1 - x2) > 1e-2 * scale:
        return (x1 ** (m + 1) - x2 ** (m + 1)) / (x1 - x2)
    return sum(x1**j * x2 ** (m - j) for j in range(m + 1))


def _leibniz_det(mat):
    n = len(mat)
    total = 0
    for perm in itertools.permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        term = sign
        for i in range(n):
            term = term * mat[i][perm[i]]
        total = total + term
    return total


def schur_value(lam: Sequence[int], x: Sequence):
    """s_lambda(x_1, ..., x_m).

    Signatures shorter than x are padded with zeros; if x is shorter, the
    surplus parts must vanish (otherwise the polynomial is 0).  Negative parts
    use the shift property s_{lambda + c}(x) = (x_1...x_m)^c s_lambda(x).
    """
    lam = list(as_signature(lam))
    x = list(x)
    m = len(x)
    if m == 0:
        raise ValueError("need at least one variable")
    if len(lam) > m:
        if any(p != 0 for p in lam[m:]):
            return 0 * x[0]
        lam = lam[:m]
    elif len(lam) < m:
        if lam[-1] < 0:
            raise ValueError("cannot pad a signature with negative parts")
        lam = lam + [0] * (m - len(lam))
    c = lam[-1]
    base = [p - c for p in lam]
    prod = 1
    for xi in x:
        prod = prod * xi
    shift = _power(prod, c) if c else 1
    if m == 1:
        return shift * x[0] ** base[0]
    if m == 2:
        return shift * _h(base[0], x[0], x[1])
    if len(set(x)) < m:
        raise ValueError("schur_value with n >= 3 needs pairwise distinct variables")
    num = [[xj ** (base[i] + m - 1 - i) for xj in x] for i in range(m)]
    den = [[xj ** (m - 1 - i) for xj in x] for i in range(m)]
    d = _leibniz_det(den)
    if isinstance(d, int):
        d = Fraction(d)
    return shift * _leibniz_det(num) / d


def _skew_one(mu, lam, x):
    if not interlaces(lam, mu):
        return 0 * x
    return x ** (sum(mu) - sum(lam))


def skew_schur_value(mu: Sequence[int], lam: Sequence[int], x: Sequence):
    """s_{mu/lambda}(x_1..x_m) by branching over intermediate signatures."""
    mu = as_signature(mu)
    lam = as_signature(lam)
    if len(mu) != len(lam):
        raise ValueError("mu and lambda must have the same length")
    x = list(x)
    if not x:
        return 1 if mu == lam else 0
    # skew shapes are shift invariant: move everything to nonnegative parts
    c = min(lam[-1], mu[-1])
    mu = tuple(p - c for p in mu)
    lam = tuple(p - c for p in lam)
    return _skew_dp(mu, lam, tuple(x))


def _skew_dp(mu, lam, x):
    if any(l > m for l, m in zip(lam, mu)):
        return 0 * x[0]
    if len(x) == 1:
        return _skew_one(mu, lam, x[0])
    n = len(mu)
    ranges = []
    for i in range(n):
        lo = max(lam[i], mu[i + 1] if i + 1 < n else lam[i])
        hi = mu[i]
        if lo > hi:
            return 0 * x[0]
        ranges.append(range(lo, hi + 1))
    total = 0 * x[0]
    for nu in itertools.product(*ranges):
        if any(nu[i] < nu[i + 1] for i in range(n - 1)):
            continue
        if not interlaces(nu, mu):
            continue
        total = total + _skew_dp(nu, lam, x[:-1]) * _skew_one(mu, nu, x[-1])
    return total


def _h_grid(m, z1, z2):
    out = np.zeros(np.broadcast(z1, z2).shape, dtype=complex)
    for j in range(m + 1):
        out = out + z1**j * z2 ** (m - j)
    return out


def _schur2_grid(lam, z1, z2):
    return (z1 * z2) ** lam[1] * _h_grid(lam[0] - lam[1], z1, z2)


def skew_schur_contour(mu, lam, a, rel_tol=1e-12, max_nodes=1024):
    """s_{mu/lambda}(a) from the double contour integral on |z_i| = 1.

    Integrand: Delta(z) s_mu(1/z) s_lambda(z) prod_{i,j} 1/(1 - z_i a_j),
    Delta(z) = (1/2) prod_{i != j} (1 - z_i/z_j), measure dz/(2 pi i z) each.
    """
    mu = as_signature(mu)
    lam = as_signature(lam)
    if len(mu) != 2 or len(lam) != 2:
        raise ValueError("skew_schur_contour is implemented for n = 2")
    a = np.asarray(a, dtype=float)
    if np.any(np.abs(a) >= 1):
        raise ValueError("contour formula needs |a_j| < 1")

    def value(n):
        w = np.exp(2j * np.pi * np.arange(n) / n)
        z1, z2 = np.meshgrid(w, w, indexing="ij")
        delta = 0.5 * (1 - z1 / z2) * (1 - z2 / z1)
        f = delta * _schur2_grid(mu, 1 / z1, 1 / z2) * _schur2_grid(lam, z1, z2)
        for aj in a:
            f = f / ((1 - z1 * aj) * (1 - z2 * aj))
        return f.mean()

    n = 16
    prev = value(n)
    while n < max_nodes:
        n *= 2
        cur = value(n)
        if abs(cur - prev) <= rel_tol * max(abs(cur), 1e-300) + 1e-15:
            return complex(cur)
        prev = cur
    raise ArithmeticError("skew_schur_contour did not converge")


# ---------------------------------------------------------------------------
# Identity verifiers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityCheck:
    """Truncated identity: |lhs - rhs| should not exceed the tail bound."""

    name: str
    lhs: object
    rhs: object
    gap: float
    tail_bound: float

    @property
    def passed(self) -> bool:
        slack = 1e-13 * abs(float(self.rhs)) if not isinstance(self.rhs, Fraction) else 0
        return self.gap <= float(self.tail_bound) + slack


def _poly_geom_tail(d: int, q, start: int):
    """Upper bound for sum_{m >= start} (m+1)^d q^m with 0 <= q < 1."""
    if q == 0:
        return 0.0 if start > 0 else 1.0
    q = float(q)
    s = 0.0
    m = start
    while ((m + 2) / (m + 1)) ** d * q >= 1:
        s += (m + 1) ** d * q**m
        m += 1
    ratio = ((m + 2) / (m + 1)) ** d * q
    return s + (m + 1) ** d * q**m / (1 - ratio)


def _two_index_tail(d: int, p, q, K: int):
    """Bound for sum over m + k > K of p^k (m+1)^d q^m with p, q in [0, 1)."""
    p, q = float(p), float(q)
    first = _poly_geom_tail(d, q, K + 1) / (1 - p)
    second = sum((m + 1) ** d * q**m * p ** (K - m + 1) for m in range(K + 1)) / (1 - p)
    return first + second


def _graded_sum(hx, hy, P, c, K):
    """sum_{m + k <= K} P^k h_m(x) h_m(y) c^m, with geometric partial sums."""
    partial = [1]
    for _ in range(K):
        partial.append(partial[-1] * P + 1)
    total = 0
    cm = 1
    for m in range(K + 1):
        total = total + hx[m] * hy[m] * cm * partial[K - m]
        cm = cm * c
    return total


def _gap(lhs, rhs):
    g = lhs - rhs
    return float(abs(g))


def verify_cauchy(x, y, cutoff: int = 60) -> IdentityCheck:
    """sum_{lambda in Sign+_2, lambda_1 <= cutoff} s_lambda(x) s_lambda(y) vs prod 1/(1 - x_i y_j)."""
    x1, x2 = x
    y1, y2 = y
    if max(abs(x1), abs(x2)) * max(abs(y1), abs(y2)) >= 1:
        raise ValueError("Cauchy sum diverges: need |x_i y_j| < 1")
    hx = [_h(m, x1, x2) for m in range(cutoff + 1)]
    hy = [_h(m, y1, y2) for m in range(cutoff + 1)]
    lhs = _graded_sum(hx, hy, x1 * x2 * y1 * y2, 1, cutoff)
    rhs = 1 / ((1 - x1 * y1) * (1 - x1 * y2) * (1 - x2 * y1) * (1 - x2 * y2))
    rx, ry = max(abs(x1), abs(x2)), max(abs(y1), abs(y2))
    tail = _two_index_tail(2, abs(x1 * x2 * y1 * y2), rx * ry, cutoff)
    return IdentityCheck("cauchy", lhs, rhs, _gap(lhs, rhs), tail)


def verify_littlewood(a, c, cutoff: int = 60) -> IdentityCheck:
    """sum_lambda s_lambda(a) c^{lambda_1 - lambda_2} vs prod 1/(1 - c a_i) / (1 - a_1 a_2)."""
    a1, a2 = a
    r = max(abs(a1), abs(a2))
    if abs(c) * r >= 1 or abs(a1 * a2) >= 1:
        raise ValueError("Littlewood sum diverges: need |c a_i| < 1 and |a_1 a_2| < 1")
    ha = [_h(m, a1, a2) for m in range(cutoff + 1)]
    lhs = _graded_sum(ha, [1] * (cutoff + 1), a1 * a2, c, cutoff)
    rhs = 1 / ((1 - c * a1) * (1 - c * a2) * (1 - a1 * a2))
    tail = _two_index_tail(1, abs(a1 * a2), abs(c) * r, cutoff)
    return IdentityCheck("littlewood", lhs, rhs, _gap(lhs, rhs), tail)


def verify_rsk_sum(x, y, c, cutoff: int = 60) -> IdentityCheck:
    """sum_lambda s_lambda(x) s_lambda(y) c^{lambda_1-lambda_2}
    vs Pi(x, c y) (1 - c^2 x1 x2 y1 y2) / (1 - x1 x2 y1 y2)."""
    x1, x2 = x
    y1, y2 = y
    rx, ry = max(abs(x1), abs(x2)), max(abs(y1), abs(y2))
    if rx * ry >= 1 or abs(c) * rx * ry >= 1:
        raise ValueError("RSK sum diverges: need |x_i y_j| < 1 and |c x_i y_j| < 1")
    P = x1 * x2 * y1 * y2
    hx = [_h(m, x1, x2) for m in range(cutoff + 1)]
    hy = [_h(m, y1, y2) for m in range(cutoff + 1)]
    lhs = _graded_sum(hx, hy, P, c, cutoff)
    pi = 1 / ((1 - c * x1 * y1) * (1 - c * x1 * y2) * (1 - c * x2 * y1) * (1 - c * x2 * y2))
    rhs = pi * (1 - c * c * P) / (1 - P)
    tail = _two_index_tail(2, abs(P), abs(c) * rx * ry, cutoff)
    return IdentityCheck("rsk_sum", lhs, rhs, _gap(lhs, rhs), tail)


def verify_signature_identities(mu, nu, a, b, c, cutoff: int = 80) -> tuple[IdentityCheck, IdentityCheck]:
    """Skew Cauchy and skew Littlewood identities over signatures (single variables).

    Cauchy:     sum_lambda s_{lambda/mu}(a) s_{lambda/nu}(b) = sum_kappa s_{mu/kappa}(b) s_{nu/kappa}(a)
    Littlewood: sum_lambda c^{lambda_1-lambda_2} s_{lambda/mu}(a) = sum_kappa c^{kappa_1-kappa_2} s_{mu/kappa}(a)
    Both sides have one unbounded direction, truncated after ``cutoff`` steps;
    the tails are exact geometric series, bounded in absolute value.
    """
    mu = as_signature(mu)
    nu = as_signature(nu)
    if len(mu) != 2 or len(nu) != 2:
        raise ValueError("signature identities are implemented for length 2")
    if abs(a * b) >= 1 or abs(a * c) >= 1:
        raise ValueError("need |ab| < 1 and |ac| < 1")
    ab = a * b
    # Cauchy variant, lambda side: lambda_1 >= max(mu1, nu1), lambda_2 in a box
    top = max(mu[0], nu[0])
    l2_range = range(max(mu[1], nu[1]), min(mu[0], nu[0]) + 1)
    lhs = 0 * ab
    edge = 0.0
    for l2 in l2_range:
        base = _power(a, l2 - sum(mu)) * _power(b, l2 - sum(nu))
        for l1 in range(top, top + cutoff + 1):
            lhs = lhs + base * ab**l1
        edge += abs(float(base))
    tail_l = edge * abs(float(ab)) ** (top + cutoff + 1) / (1 - abs(float(ab)))
    # kappa side: kappa_1 in a box, kappa_2 <= min(mu2, nu2)
    low = min(mu[1], nu[1])
    k1_range = range(max(mu[1], nu[1]), min(mu[0], nu[0]) + 1)
    rhs = 0 * ab
    edge = 0.0
    for k1 in k1_range:
        base = _power(b, sum(mu) - k1) * _power(a, sum(nu) - k1)
        for j in range(cutoff + 1):
            rhs = rhs + base * ab ** (j - low)
        edge += abs(float(base))
    tail_r = edge * abs(float(ab)) ** (cutoff + 1 - low) / (1 - abs(float(ab)))
    cauchy = IdentityCheck("skew_cauchy_signatures", lhs, rhs, _gap(lhs, rhs), tail_l + tail_r)

    ac = a * c
    lhs = 0 * ac
    edge = 0.0
    for l2 in range(mu[1], mu[0] + 1):
        base = _power(c, -l2) * _power(a, l2 - sum(mu))
        for l1 in range(mu[0], mu[0] + cutoff + 1):
            lhs = lhs + base * ac**l1
        edge += abs(float(base))
    tail_l = edge * abs(float(ac)) ** (mu[0] + cutoff + 1) / (1 - abs(float(ac)))
    rhs = 0 * ac
    edge = 0.0
    for k1 in range(mu[1], mu[0] + 1):
        base = _power(c, k1) * _power(a, sum(mu) - k1)
        for j in range(cutoff + 1):
            rhs = rhs + base * ac ** (j - mu[1])
        edge += abs(float(base))
    tail_r = edge * abs(float(ac)) ** (cutoff + 1 - mu[1]) / (1 - abs(float(ac)))
    little = IdentityCheck("skew_littlewood_signatures", lhs, rhs, _gap(lhs, rhs), tail_l + tail_r)
    return cauchy, little
