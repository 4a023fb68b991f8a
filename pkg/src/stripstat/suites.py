"""Verification suites shared by the command line and the acceptance tests.

Each suite returns a list of check records {name, gap, bound, passed}.
"""
from __future__ import annotations

import math

import numpy as np

from .formulas import partition_geo, partition_geo_residues
from .numerics import NonConvergenceError
from .params import GeoParams
from .schur import verify_cauchy, verify_littlewood, verify_rsk_sum, verify_signature_identities
from .twolayer.geo import kernel_geo
from .whittaker import (
    psi2,
    psi_givental,
    verify_cauchy_whittaker,
    verify_grsk_sum,
    verify_littlewood_whittaker,
    verify_mellin_n1,
)

__all__ = ["SUITES", "run_suite", "suite_schur", "suite_whittaker", "suite_partition",
           "suite_kernels", "z_geo_closed_form"]

# below this relative tolerance no suite can converge in double precision
TOL_FLOOR = 1e-15


def _record(name, gap, bound):
    return {"name": name, "gap": float(gap), "bound": float(bound), "passed": bool(gap <= bound)}


def suite_schur(tol: float = 1e-10, draws: int = 50, seed=0) -> list[dict]:
    """Truncated Schur identities on random parameters; each tail bound must be below tol."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(draws):
        x = rng.uniform(0.05, 0.8, 2)
        y = rng.uniform(0.05, 0.8, 2)
        c = rng.uniform(0.05, 0.9)
        a, b = rng.uniform(0.05, 0.8, 2)
        mu = tuple(sorted(rng.integers(0, 5, 2), reverse=True))
        nu = tuple(sorted(rng.integers(0, 5, 2), reverse=True))
        checks = [
            verify_cauchy(x, y, cutoff=200),
            verify_littlewood(x, c, cutoff=200),
            verify_rsk_sum(x, y, c, cutoff=200),
            *verify_signature_identities(mu, nu, a, b, c, cutoff=200),
        ]
        for ch in checks:
            bound = float(ch.tail_bound)
            ok = ch.passed and bound <= tol
            out.append({"name": f"{ch.name}[{k}]", "gap": ch.gap, "bound": bound, "passed": bool(ok)})
    return out


def suite_whittaker(tol: float | None = None) -> list[dict]:
    """Whittaker identities at their stated tolerances (or a common tol)."""
    t = (lambda default: default if tol is None else tol)
    rt = (lambda default: min(1e-9, t(default) * 1e-2))
    out = []
    c1 = verify_cauchy_whittaker(1, [0.7], [0.9], rel_tol=rt(1e-10))
    out.append(_record("whittaker_cauchy_n1", c1.gap, t(1e-10)))
    c2 = verify_cauchy_whittaker(2, [0.4, 0.9], [0.6, 0.8], rel_tol=rt(1e-6))
    out.append(_record("whittaker_cauchy_n2", c2.gap, t(1e-6)))
    lw = verify_littlewood_whittaker([0.5, 0.8], 0.7, 0.3, rel_tol=rt(1e-6))
    out.append(_record("whittaker_littlewood", lw.gap, t(1e-6)))
    gr = verify_grsk_sum([0.5, 0.8], [0.6, 0.7], 0.9, 0.3, rel_tol=rt(1e-6))
    out.append(_record("whittaker_grsk", gr.gap, t(1e-6)))
    for z, x in [((0.3, -0.2), (0.5, -0.4)), ((0.1j, -0.1j), (1.0, 0.2))]:
        g = complex(psi_givental(list(z), list(x), rel_tol=rt(1e-8)))
        b = complex(psi2(z[0], z[1], x[0], x[1]))
        out.append(_record(f"givental_vs_bessel{z}", abs(g - b) / abs(b), t(1e-8)))
    me = verify_mellin_n1(0.3 + 0.4j, 0.7, rel_tol=rt(1e-9))
    out.append(_record("whittaker_mellin_n1", me.gap, t(1e-9)))
    return out


def z_geo_closed_form(N: int, a, c1: float, c2: float) -> float:
    z0 = 1 / (1 - c1 * c2)
    if N == 0:
        return z0
    if N == 1:
        a1 = a[0]
        return z0 / ((1 - a1 * c1) * (1 - a1 * c2))
    if N == 2:
        a1, a2 = a
        num = 1 - a1 * a2 * c1 * c2
        den = (1 - c1 * c2) * (1 - a1 * c1) * (1 - a1 * c2) * (1 - a2 * c1) * (1 - a2 * c2) * (1 - a1 * a2)
        return num / den
    raise ValueError("closed forms are available for N <= 2")


def suite_partition(tol: float = 1e-10) -> list[dict]:
    """Z_Geo(N), N = 0, 1, 2 by quadrature and by residues against the closed forms."""
    p = GeoParams((0.5, 0.6), 0.3, 0.4)
    out = []
    for N in (0, 1, 2):
        exact = z_geo_closed_form(N, p.a[:N], p.c1, p.c2)
        q = partition_geo(N, p, rel_tol=min(1e-13, tol))
        r = partition_geo_residues(N, p)
        out.append(_record(f"z_geo_quadrature_N{N}", abs(q / exact - 1), tol))
        out.append(_record(f"z_geo_residues_N{N}", abs(r / exact - 1), tol))
    return out


def suite_kernels(tol: float = 1e-9) -> list[dict]:
    """Row sums and the semigroup property of the geometric kernels at N = 3."""
    p = GeoParams.homogeneous(0.5, 3, 0.3, 0.4)
    out = []
    # rows: mu_1 runs to a cutoff whose geometric tail a^K is far below tol
    K = int(math.ceil(math.log(tol * 1e-3) / math.log(0.5)))
    for x in range(3):
        for lam in [(0, 0), (1, 0), (3, 1)]:
            total = sum(kernel_geo(x, x + 1, lam, (m1, m2), p)
                        for m2 in range(lam[1], lam[0] + 1)
                        for m1 in range(lam[0], lam[0] + K))
            out.append(_record(f"row_sum_x{x}_{lam}", abs(total - 1), tol))
    for lam, mu in [((2, 1), (4, 1)), ((1, 0), (3, 2)), ((0, 0), (2, 0))]:
        comp = sum(kernel_geo(0, 1, lam, (k1, k2), p) * kernel_geo(1, 2, (k1, k2), mu, p)
                   for k1 in range(lam[0], mu[0] + 1) for k2 in range(lam[1], lam[0] + 1))
        direct = kernel_geo(0, 2, lam, mu, p)
        out.append(_record(f"semigroup_{lam}_{mu}", abs(comp - direct) / direct, tol))
    return out


SUITES = {
    "schur": suite_schur,
    "whittaker": suite_whittaker,
    "partition": suite_partition,
    "kernels": suite_kernels,
}


def run_suite(name: str, tol: float | None = None, seed=0) -> list[dict]:
    if tol is not None and tol < TOL_FLOOR:
        raise NonConvergenceError(f"tolerance {tol:g} is below the attainable floor {TOL_FLOOR:g}")
    names = list(SUITES) if name == "all" else [name]
    out = []
    for n in names:
        if n not in SUITES:
            raise ValueError(f"unknown suite {n!r}")
        fn = SUITES[n]
        if n == "schur":
            out += fn(tol if tol is not None else 1e-10, seed=seed)
        elif n == "whittaker":
            out += fn(tol)
        else:
            out += fn(tol) if tol is not None else fn()
    return out
