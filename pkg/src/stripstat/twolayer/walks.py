"""Pitman transforms of walk pairs and the walk-pair reference weights.

Walks are arrays whose last axis runs over 0..N with value 0 at index 0;
leading axes are batch axes.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln, xlogy

from ..params import GeoParams, LGParams, ParameterError

__all__ = ["pitman_geo", "pitman_lg", "walk_weight_geo", "walk_weight_lg"]


def _check_pair(L1, L2):
    L1 = np.asarray(L1)
    L2 = np.asarray(L2)
    if L1.shape != L2.shape:
        raise ValueError("L1 and L2 must have the same shape")
    if L1.shape[-1] < 2:
        raise ValueError("walks need at least one step")
    return L1, L2


def pitman_geo(L1, L2):
    """(L1 (x) L2, L2 (.) L1) for integer walks.

    otimes(k) = min_{1<=j<=k} {L1(j-1) + L2(k) - L2(j)},
    odot(k)   = max_{1<=j<=k} {L2(j) + L1(k) - L1(j-1)},
    so that L1 + L2 = otimes + odot.  Index 0 of both outputs is 0.
    """
    L1, L2 = _check_pair(L1, L2)
    L1 = L1.astype(np.int64)
    L2 = L2.astype(np.int64)
    lo = np.minimum.accumulate(L1[..., :-1] - L2[..., 1:], axis=-1)
    hi = np.maximum.accumulate(L2[..., 1:] - L1[..., :-1], axis=-1)
    otimes = np.zeros_like(L1)
    odot = np.zeros_like(L1)
    otimes[..., 1:] = L2[..., 1:] + lo
    odot[..., 1:] = L1[..., 1:] + hi
    return otimes, odot


def pitman_lg(L1, L2):
    """Geometric Pitman transform -log sum_{j<=k} exp(-(L1(j-1) + L2(k) - L2(j))).

    Computed as L2(k) - logcumsumexp(L2(j) - L1(j-1)); index 0 is set to 0.
    """
    L1, L2 = _check_pair(L1, L2)
    L1 = L1.astype(float)
    L2 = L2.astype(float)
    acc = np.logaddexp.accumulate(L2[..., 1:] - L1[..., :-1], axis=-1)
    out = np.zeros_like(L1)
    out[..., 1:] = L2[..., 1:] - acc
    return out


def walk_weight_geo(L1, L2, params: GeoParams):
    """Unnormalized log-density of (L1, L2) under the geometric walk measure.

    -(L1 (x) L2)(N) log(c1 c2) + log P^{a c2}(L1) + log P^{a c1}(L2), with the
    column-i increment using a_i.
    """
    L1, L2 = _check_pair(L1, L2)
    N = L1.shape[-1] - 1
    d1 = np.diff(L1, axis=-1)
    d2 = np.diff(L2, axis=-1)
    if np.any(d1 < 0) or np.any(d2 < 0):
        raise ParameterError("geometric walks have nonnegative increments")
    if params.c1 * params.c2 == 0:
        raise ParameterError("the reweighting needs c1 c2 > 0")
    a = np.asarray(params.rates(N))
    q1 = a * params.c2
    q2 = a * params.c1
    out = (xlogy(d1, q1) + np.log1p(-q1)).sum(axis=-1)
    out = out + (xlogy(d2, q2) + np.log1p(-q2)).sum(axis=-1)
    otimes, _ = pitman_geo(L1, L2)
    return out - otimes[..., -1] * math.log(params.c1 * params.c2)


def _loggamma_walk(d, theta):
    return (-gammaln(theta) - theta * d - np.exp(-d)).sum(axis=-1)


def walk_weight_lg(L1, L2, params: LGParams):
    """(u+v) (L1 (x) L2)(N) + log P^{alpha+v}(L1) + log P^{alpha+u}(L2)."""
    L1, L2 = _check_pair(L1, L2)
    N = L1.shape[-1] - 1
    al = np.asarray(params.rates(N))
    d1 = np.diff(np.asarray(L1, dtype=float), axis=-1)
    d2 = np.diff(np.asarray(L2, dtype=float), axis=-1)
    out = _loggamma_walk(d1, al + params.v) + _loggamma_walk(d2, al + params.u)
    return out + (params.u + params.v) * pitman_lg(L1, L2)[..., -1]
