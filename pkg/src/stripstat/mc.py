"""Monte Carlo estimate records and small statistics helpers."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

__all__ = ["McEstimate", "mean_estimate", "snis_estimate", "integrated_autocorr_time"]


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n: int
    ess: float
    flagged: bool = False

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")
        if self.ess > self.n * (1 + 1e-12):
            raise ValueError("ess cannot exceed n")

    def within(self, value: float, k: float = 3.0) -> bool:
        return abs(self.mean - value) <= k * self.stderr

    def zscore(self, value: float) -> float:
        return (self.mean - value) / self.stderr if self.stderr > 0 else np.inf

    def as_dict(self):
        return asdict(self)


def mean_estimate(x, ess_floor: float = 0.0) -> McEstimate:
    """Plain sample mean of iid draws."""
    x = np.asarray(x, dtype=float).ravel()
    n = len(x)
    se = float(x.std(ddof=1) / np.sqrt(n)) if n > 1 else float("inf")
    return McEstimate(float(x.mean()), se, n, float(n), n < ess_floor)


def snis_estimate(logw, f, ess_floor: float = 0.0) -> McEstimate:
    """Self-normalized importance sampling estimate of E[f] from log-weights.

    The standard error is the delta-method one,
    sqrt(sum w^2 (f - mean)^2) / sum w.
    """
    logw = np.asarray(logw, dtype=float).ravel()
    f = np.asarray(f, dtype=float).ravel()
    w = np.exp(logw - logw.max())
    sw = w.sum()
    mean = float((w * f).sum() / sw)
    se = float(np.sqrt((w * w * (f - mean) ** 2).sum()) / sw)
    ess = float(sw * sw / (w * w).sum())
    return McEstimate(mean, se, len(w), ess, ess < ess_floor)


def integrated_autocorr_time(chains) -> float:
    """Integrated autocorrelation time of a (chains, draws) array.

    Autocorrelations are averaged over chains and summed with Geyer's initial
    positive sequence rule.
    """
    x = np.asarray(chains, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    n = x.shape[1]
    x = x - x.mean(axis=1, keepdims=True)
    var = (x * x).mean()
    if var == 0 or n < 4:
        return 1.0
    size = 1 << (2 * n - 1).bit_length()
    fx = np.fft.rfft(x, size, axis=1)
    acov = np.fft.irfft(fx * np.conj(fx), size, axis=1)[:, :n].mean(axis=0) / n
    rho = acov / acov[0]
    tau = -1.0
    for k in range(0, n - 1, 2):
        pair = rho[k] + rho[k + 1]
        if pair <= 0:
            break
        tau += 2 * pair
    return max(tau, 1.0)
