"""Complex special functions and contour-integration engines.

Everything here works on numpy arrays of complex128 (scalars are accepted and
returned as Python complex).  Integrands handed to the quadrature routines must
be vectorized: they receive an array of nodes and return an array of values.

Conventions
-----------
* ``integrate_circle`` and ``integrate_vertical`` return the normalized
  integral  (1/2 pi i) \\oint f(z) dz, positively oriented / upward.
* ``GammaProduct`` represents  extra(z) * prod_j Gamma(a_j + s_j z)^{+-p_j}.
  Its ``continued_integral`` evaluates the analytic continuation of the
  integral over iR obtained by keeping the "left" pole families
  (slope > 0) to the left of the contour and the "right" families
  (slope < 0) to the right, via a shifted line plus residue corrections.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "PoleError",
    "CollisionError",
    "NonConvergenceError",
    "ContourSpec",
    "QuadratureResult",
    "log_gamma",
    "gamma",
    "rgamma",
    "rgamma_pm2z",
    "digamma",
    "trigamma",
    "bessel_k",
    "log_bessel_k",
    "integrate_circle",
    "integrate_vertical",
    "GammaFactor",
    "GammaProduct",
    "Pole",
    "ContinuedIntegral",
    "gamma_product_residue",
    "EPS_COLLISION",
    "COLLISION_RADIUS",
]

EPS_COLLISION = 1e-8
COLLISION_RADIUS = 1e-3
_LOG_2PI_HALF = 0.5 * math.log(2.0 * math.pi)


class PoleError(ValueError):
    """Argument sits on a pole of the Gamma function."""


class CollisionError(ArithmeticError):
    """Two Gamma factors are singular at (numerically) the same point."""


class NonConvergenceError(ArithmeticError):
    """A quadrature did not reach its tolerance within the node budget."""


# ---------------------------------------------------------------------------
# Contour descriptions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContourSpec:
    """Circle ``|z - center| = radius`` or vertical line ``Re z = real_part``.

    For vertical contours ``half_height`` is only the initial truncation; the
    integrator grows it until the tail estimate is below tolerance.
    """

    kind: str = "circle"
    radius: float = 1.0
    center: complex = 0j
    real_part: float = 0.0
    half_height: float = 8.0
    initial_nodes: int = 16
    rel_tol: float = 1e-10
    max_nodes: int = 2**20

    def __post_init__(self):
        if self.kind not in ("circle", "vertical"):
            raise ValueError(f"unknown contour kind {self.kind!r}")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if not self.half_height > 0:
            raise ValueError("half_height must be positive")
        if self.initial_nodes < 8 or self.initial_nodes % 2:
            raise ValueError("initial_nodes must be an even integer >= 8")
        if not 0 < self.rel_tol < 1:
            raise ValueError("rel_tol must lie in (0, 1)")

    @classmethod
    def circle(cls, radius=1.0, center=0j, **kw):
        return cls(kind="circle", radius=radius, center=center, **kw)

    @classmethod
    def vertical(cls, real_part=0.0, decay_rate=None, half_height=None, **kw):
        """Vertical line; ``decay_rate`` r means |f(sigma+iy)| ~ exp(-r|y|)."""
        tol = kw.get("rel_tol", 1e-10)
        if half_height is None:
            rate = decay_rate if decay_rate else 1.0
            half_height = (-math.log(tol) + 5.0) / rate
        return cls(kind="vertical", real_part=real_part, half_height=half_height, **kw)


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error_estimate: float
    nodes_used: int
    converged: bool

    @property
    def real(self) -> float:
        return float(np.real(self.value))

    def require(self) -> "QuadratureResult":
        if not self.converged:
            raise NonConvergenceError(
                f"quadrature stopped at {self.nodes_used} nodes, "
                f"error estimate {self.error_estimate:.3g}"
            )
        return self


# ---------------------------------------------------------------------------
# Gamma family
# ---------------------------------------------------------------------------

# Lanczos coefficients for g = 607/128, 15 terms (Godfrey's table).
_LANCZOS_G = 607.0 / 128.0
_LANCZOS_C = np.array(
    [
        0.99999999999999709182,
        57.156235665862923517,
        -59.597960355475491248,
        14.136097974741747174,
        -0.49191381609762019978,
        0.33994649984811888699e-4,
        0.46523628927048575665e-4,
        -0.98374475304879564677e-4,
        0.15808870322491248884e-3,
        -0.21026444172410488319e-3,
        0.21743961811521264320e-3,
        -0.16431810653676389022e-3,
        0.84418223983852743293e-4,
        -0.26190838401581408670e-4,
        0.36899182659531622704e-5,
    ]
)


def _as_complex(z):
    arr = np.asarray(z, dtype=complex)
    return arr, arr.ndim == 0


def _out(arr, scalar):
    return complex(arr) if scalar else arr


def _pole_mask(z):
    re = z.real
    return (z.imag == 0) & (re <= 0) & (re == np.round(re))


def _lanczos(w):
    # log Gamma(w) for Re w >= 1/2
    x = w - 1.0
    s = np.full_like(x, _LANCZOS_C[0])
    for k in range(1, len(_LANCZOS_C)):
        s = s + _LANCZOS_C[k] / (x + k)
    t = x + _LANCZOS_G + 0.5
    return _LOG_2PI_HALF + (x + 0.5) * np.log(t) - t + np.log(s)


def log_gamma(z):
    """Principal branch of log Gamma(z).

    Lanczos approximation for Re z >= 1/2.  Left of that the recurrence
    log Gamma(z) = log Gamma(z + n) - sum_k log(z + k) is used; each term is
    analytic on the slit plane, so the result is the principal branch.
    """
    z, scalar = _as_complex(z)
    if np.any(_pole_mask(z)):
        raise PoleError("log_gamma evaluated at a nonpositive integer")
    shift = np.maximum(0, np.ceil(0.5 - z.real)).astype(int)
    out = _lanczos(z + shift)
    for k in range(int(shift.max(initial=0))):
        m = shift > k
        out = np.where(m, out - np.log(np.where(m, z + k, 1.0)), out)
    return _out(out, scalar)


def gamma(z):
    """Gamma(z); raises PoleError at nonpositive integers."""
    z, scalar = _as_complex(z)
    return _out(np.exp(np.asarray(log_gamma(z))), scalar)


def rgamma(z):
    """1/Gamma(z), an entire function (exact zeros at the poles of Gamma)."""
    z, scalar = _as_complex(z)
    poles = _pole_mask(z)
    safe = np.where(poles, 1.0, z)
    out = np.where(poles, 0.0, np.exp(-np.asarray(log_gamma(safe))))
    return _out(out, scalar)


def rgamma_pm2z(z):
    """1/(Gamma(2z) Gamma(-2z)) = -2 z sin(2 pi z) / pi, entire."""
    z, scalar = _as_complex(z)
    return _out(-2.0 * z * np.sin(2.0 * np.pi * z) / np.pi, scalar)


_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510)


def _digamma_right(w):
    n = np.maximum(0, np.ceil(12.0 - w.real)).astype(int)
    acc = np.zeros_like(w)
    for k in range(int(n.max(initial=0))):
        m = n > k
        acc = np.where(m, acc - 1.0 / np.where(m, w + k, 1.0), acc)
    x = w + n
    x2 = 1.0 / (x * x)
    series = np.zeros_like(x)
    p = x2.copy()
    for k, b in enumerate(_BERNOULLI, start=1):
        series = series + b / (2 * k) * p
        p = p * x2
    return acc + np.log(x) - 0.5 / x - series


def _trigamma_right(w):
    n = np.maximum(0, np.ceil(12.0 - w.real)).astype(int)
    acc = np.zeros_like(w)
    for k in range(int(n.max(initial=0))):
        m = n > k
        wk = np.where(m, w + k, 1.0)
        acc = np.where(m, acc + 1.0 / (wk * wk), acc)
    x = w + n
    x2 = 1.0 / (x * x)
    series = 1.0 / x + 0.5 * x2
    p = x2 / x
    for b in _BERNOULLI:
        series = series + b * p
        p = p * x2
    return acc + series


def digamma(z):
    """psi(z) = d/dz log Gamma(z), with reflection for Re z < 1/2."""
    z, scalar = _as_complex(z)
    if np.any(_pole_mask(z)):
        raise PoleError("digamma evaluated at a nonpositive integer")
    left = z.real < 0.5
    w = np.where(left, 1.0 - z, z)
    out = _digamma_right(w)
    if np.any(left):
        out = np.where(left, out - np.pi / np.tan(np.pi * np.where(left, z, 0.5)), out)
    return _out(out, scalar)


def trigamma(z):
    """psi_1(z) = d/dz psi(z), with reflection for Re z < 1/2."""
    z, scalar = _as_complex(z)
    if np.any(_pole_mask(z)):
        raise PoleError("trigamma evaluated at a nonpositive integer")
    left = z.real < 0.5
    w = np.where(left, 1.0 - z, z)
    out = _trigamma_right(w)
    if np.any(left):
        s = np.sin(np.pi * np.where(left, z, 0.5))
        out = np.where(left, (np.pi / s) ** 2 - out, out)
    return _out(out, scalar)


# ---------------------------------------------------------------------------
# Bessel K of complex order
# ---------------------------------------------------------------------------


def _bessel_k_scaled(nu, x, rel_tol):
    """(S, peak) with K_nu(x) = S * exp(peak); nu, x flat arrays.

    Elements are grouped by the width of the integrand peak and by the
    truncation point so that each group shares one trapezoid grid.
    """
    a = np.abs(nu.real)
    tpk = np.arcsinh(a / x)
    hyp = np.hypot(x, a)
    peak = a * tpk - hyp
    # peak + x without cancellation; the exponent is written as
    # a t - 2 x sinh(t/2)^2 - shift so large x keeps full relative accuracy
    shift = a * tpk - a * a / (hyp + x)

    def excess(t):
        # sinh overflow only means "far past the peak", which is the answer
        with np.errstate(over="ignore"):
            return a * t - 2.0 * x * np.sinh(0.5 * t) ** 2 - shift + 60.0

    hi = tpk + 1.0 / np.sqrt(np.maximum(hyp, 1e-300)) + 1.0 / (1.0 + hyp)
    while True:
        bad = excess(hi) > 0
        if not bad.any():
            break
        hi = np.where(bad, tpk + 2.0 * (hi - tpk), hi)
    lo = tpk.copy()
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        pos = excess(mid) > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    tmax = hi * 1.02 + 1e-12
    # initial step: a quarter, or a fraction of the Gaussian width at the peak
    h0 = np.minimum(0.25, 0.5 / np.sqrt(np.maximum(hyp, 1e-300)))
    key_h = np.floor(np.log2(h0)).astype(int)
    key_t = np.ceil(np.log2(tmax)).astype(int)
    out = np.empty(len(nu), dtype=complex)
    for kh, kt in set(zip(key_h.tolist(), key_t.tolist())):
        idx = np.nonzero((key_h == kh) & (key_t == kt))[0]
        out[idx] = _bessel_trap(nu[idx], x[idx], shift[idx], 2.0**kh, 2.0**kt, rel_tol)
    return out, peak


# cap on the (rows x nodes) work array of one trapezoid pass
_TRAP_BLOCK = 1 << 21


def _bessel_trap(nu, x, shift, h, tmax, rel_tol):
    def trap(rows, h):
        t = np.arange(0.0, tmax + h, h)
        sh = np.sinh(0.5 * t)[None, :] ** 2
        val = np.empty(len(rows), dtype=complex)
        scale = np.empty(len(rows))
        step = max(1, _TRAP_BLOCK // len(t))
        for s in range(0, len(rows), step):
            r = rows[s: s + step]
            ex = -2.0 * x[r, None] * sh - shift[r, None]
            nt = nu[r, None] * t[None, :]
            f = 0.5 * (np.exp(ex + nt) + np.exp(ex - nt))
            f[:, 0] *= 0.5
            val[s: s + step] = h * f.sum(axis=1)
            scale[s: s + step] = h * np.abs(f).sum(axis=1)
        return val, scale

    hmin = h / 512
    active = np.arange(len(nu))
    prev, _ = trap(active, h)
    out = prev.copy()
    while True:
        h *= 0.5
        cur, scale = trap(active, h)
        out[active] = cur
        done = np.abs(cur - prev) <= rel_tol * np.abs(cur) + 1e-15 * scale
        if done.all() or h < hmin:
            return out
        # only unconverged rows are refined further
        active, prev = active[~done], cur[~done]


def _bessel_args(order, arg):
    nu, scalar_nu = _as_complex(order)
    x = np.asarray(arg, dtype=float)
    if np.any(~(x > 0)) or not np.all(np.isfinite(x)):
        raise ValueError("bessel_k requires a positive finite argument")
    scalar = scalar_nu and x.ndim == 0
    nu, x = np.broadcast_arrays(nu, x)
    return nu.ravel(), x.ravel(), nu.shape, scalar


def bessel_k(order, arg, rel_tol=1e-13):
    """K_nu(x) for complex nu and x > 0.

    Uses K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt with the trapezoid
    rule.  The integrand decays double-exponentially and is analytic in the
    strip |Im t| < pi/2, so halving the step roughly doubles the digits.
    The integrand is rescaled by its peak to avoid overflow for small x.
    """
    nu, x, shape, scalar = _bessel_args(order, arg)
    s, peak = _bessel_k_scaled(nu, x, rel_tol)
    return _out((s * np.exp(peak)).reshape(shape), scalar)


def log_bessel_k(order, arg, rel_tol=1e-13):
    """log K_nu(x) without under/overflow (principal log of the complex value)."""
    nu, x, shape, scalar = _bessel_args(order, arg)
    s, peak = _bessel_k_scaled(nu, x, rel_tol)
    return _out((np.log(s) + peak).reshape(shape), scalar)


# ---------------------------------------------------------------------------
# Trapezoid engines
# ---------------------------------------------------------------------------


def _eval(f, z):
    return np.broadcast_to(np.asarray(f(z), dtype=complex), z.shape)


def integrate_circle(integrand: Callable, spec: ContourSpec | None = None) -> QuadratureResult:
    """(1/2 pi i) \\oint f(z) dz over a positively oriented circle.

    Equispaced trapezoid nodes, doubled until the change falls below
    ``rel_tol * |value|`` (plus a roundoff floor proportional to the mean
    absolute integrand).
    """
    spec = spec or ContourSpec.circle()
    if spec.kind != "circle":
        raise ValueError("integrate_circle needs a circle ContourSpec")
    c, r = complex(spec.center), spec.radius
    n = spec.initial_nodes
    theta = 2.0 * np.pi * np.arange(n) / n
    dz = r * np.exp(1j * theta)
    vals = _eval(integrand, c + dz) * dz
    total = vals.sum()
    absum = np.abs(vals).sum()
    est = total / n
    err = math.inf
    converged = False
    while 2 * n <= spec.max_nodes:
        theta = 2.0 * np.pi * (np.arange(n) + 0.5) / n
        dz = r * np.exp(1j * theta)
        vals = _eval(integrand, c + dz) * dz
        total += vals.sum()
        absum += np.abs(vals).sum()
        n *= 2
        new = total / n
        err = abs(new - est)
        est = new
        if err <= spec.rel_tol * abs(est) + 64 * np.finfo(float).eps * absum / n:
            converged = True
            break
    return QuadratureResult(complex(est), float(err), n, converged)


def integrate_vertical(
    integrand: Callable, spec: ContourSpec | None = None, decay_rate: float = 1.0
) -> QuadratureResult:
    """(1/2 pi i) \\int f(z) dz along Re z = spec.real_part, upward.

    Trapezoid rule in y with z = sigma + i y.  The truncation height grows by
    half while the endpoint values indicate a non-negligible tail (tail
    estimated as |f(endpoint)| / decay_rate), and the step is halved until the
    change drops below tolerance.
    """
    spec = spec or ContourSpec.vertical()
    if spec.kind != "vertical":
        raise ValueError("integrate_vertical needs a vertical ContourSpec")
    sigma = spec.real_part
    tol = spec.rel_tol
    eps = np.finfo(float).eps
    kmax = spec.initial_nodes // 2
    h = spec.half_height / kmax
    ys = h * np.arange(-kmax, kmax + 1)
    vals = _eval(integrand, sigma + 1j * ys)

    def summary():
        value = h * vals.sum() / (2 * np.pi)
        scale = h * np.abs(vals).sum() / (2 * np.pi)
        tail = (abs(vals[0]) + abs(vals[-1])) / (2 * np.pi) * max(1.0 / decay_rate, h)
        return value, scale, tail

    value, scale, tail = summary()
    err = math.inf
    converged = False
    while True:
        # grow the window until the tail is negligible
        while tail > tol * abs(value) + 64 * eps * scale and len(ys) < spec.max_nodes:
            extra = max(2, int(math.ceil(0.5 * ys[-1] / h)))
            left = ys[0] - h * np.arange(extra, 0, -1)
            right = ys[-1] + h * np.arange(1, extra + 1)
            vals = np.concatenate(
                [_eval(integrand, sigma + 1j * left), vals, _eval(integrand, sigma + 1j * right)]
            )
            ys = np.concatenate([left, ys, right])
            value, scale, tail = summary()
        if 2 * len(ys) - 1 > spec.max_nodes:
            break
        mids = ys[:-1] + 0.5 * h
        vm = _eval(integrand, sigma + 1j * mids)
        ny = np.empty(2 * len(ys) - 1)
        nv = np.empty(2 * len(ys) - 1, dtype=complex)
        ny[0::2], ny[1::2] = ys, mids
        nv[0::2], nv[1::2] = vals, vm
        ys, vals = ny, nv
        h *= 0.5
        old = value
        value, scale, tail = summary()
        err = abs(value - old)
        bound = tol * abs(value) + 64 * eps * scale
        if err <= bound and tail <= bound:
            converged = True
            break
    return QuadratureResult(complex(value), float(max(err, tail)), len(ys), converged)


# ---------------------------------------------------------------------------
# Gamma products, residues and continued contour integrals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GammaFactor:
    """Gamma(shift + slope*z)^power in the numerator or the denominator."""

    shift: complex
    slope: int
    position: str = "numerator"
    power: int = 1

    def __post_init__(self):
        if self.slope not in (-2, -1, 1, 2):
            raise ValueError("slope must be one of -2, -1, 1, 2")
        if self.position not in ("numerator", "denominator"):
            raise ValueError("position must be 'numerator' or 'denominator'")
        if self.power < 1:
            raise ValueError("power must be a positive integer")

    @property
    def numerator(self) -> bool:
        return self.position == "numerator"

    @property
    def family(self) -> str:
        """Poles of slope > 0 factors run off to the left, the others to the right."""
        return "left" if self.slope > 0 else "right"

    def argument(self, z):
        return self.shift + self.slope * z

    def pole(self, i: int) -> complex:
        return complex((-i - self.shift) / self.slope)


@dataclass(frozen=True)
class Pole:
    location: complex
    factor: int
    index: int
    family: str


def _singular_index(w, tol):
    i = int(round(-w.real))
    if i >= 0 and abs(w + i) <= tol * max(1.0, abs(w)):
        return i
    return None


def _factor_values(factors, z, skip=()):
    """prod of the factors (except those in ``skip``) at the array z."""
    z = np.asarray(z, dtype=complex)
    logs = np.zeros_like(z)
    lin = np.ones_like(z)
    for j, f in enumerate(factors):
        if j in skip:
            continue
        w = f.argument(z)
        if f.numerator:
            logs = logs + f.power * np.asarray(log_gamma(w))
        else:
            lin = lin * np.asarray(rgamma(w)) ** f.power
    return np.exp(logs) * lin


def gamma_product_residue(
    factors: Sequence[GammaFactor], extra: Callable | None, pole: complex
) -> complex:
    """Residue of extra(z) * prod Gamma(...)^{+-1} at a simple pole.

    Exactly one numerator factor (of power 1) may be singular at ``pole``.  A
    denominator factor vanishing there cancels the pole and the residue is 0.
    Any other numerator factor within EPS_COLLISION of a pole raises
    CollisionError so the caller can fall back to circle quadrature.
    """
    pole = complex(pole)
    hit = []
    near = []
    den_zero = False
    for j, f in enumerate(factors):
        w = complex(f.argument(pole))
        i = _singular_index(w, 1e-12)
        if f.numerator:
            if i is not None:
                hit.append((j, i))
            elif _singular_index(w, EPS_COLLISION) is not None:
                near.append(j)
        elif _singular_index(w, EPS_COLLISION) is not None:
            den_zero = True
    if not hit:
        raise ValueError(f"{pole} is not a pole of any numerator factor")
    if len(hit) > 1 or near or factors[hit[0][0]].power > 1:
        raise CollisionError(f"several Gamma singularities collide near {pole}")
    if den_zero:
        return 0j
    j, i = hit[0]
    res = (-1) ** i * math.exp(-math.lgamma(i + 1)) / factors[j].slope
    rest = complex(_factor_values(factors, np.array(pole), skip=(j,)))
    ex = complex(extra(np.array(pole))) if extra is not None else 1.0
    return complex(res * rest * ex)


@dataclass(frozen=True)
class ContinuedIntegral:
    value: complex
    line: QuadratureResult
    corrections: tuple
    sigma: float


@dataclass
class GammaProduct:
    """F(z) = extra(z) * prod_j Gamma(a_j + s_j z)^{+-p_j}, vectorized in z."""

    factors: list
    extra: Callable | None = None
    decay_rate: float = 1.0
    _extra_name: str = field(default="", repr=False)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = _factor_values(self.factors, z)
        if self.extra is not None:
            out = out * self.extra(z)
        return out

    def with_extra(self, extra: Callable) -> "GammaProduct":
        base = self.extra

        def combined(z):
            e = extra(z)
            return e * base(z) if base is not None else e

        return GammaProduct(list(self.factors), combined, self.decay_rate)

    def poles(self, re_min: float, re_max: float) -> list[Pole]:
        out = []
        for j, f in enumerate(self.factors):
            if not f.numerator:
                continue
            i = 0
            while True:
                p = f.pole(i)
                if f.slope > 0 and p.real < re_min:
                    break
                if f.slope < 0 and p.real > re_max:
                    break
                if re_min <= p.real <= re_max:
                    out.append(Pole(p, j, i, f.family))
                i += 1
                if i > 10_000:
                    break
        return out

    def choose_sigma(self, window: float = 0.45) -> float:
        """A line Re z = sigma near 0, as far as possible from every pole."""
        poles = self.poles(-50.0, 50.0)
        best, best_score = 0.0, -math.inf
        for s in np.linspace(-window, window, 181):
            bad = False
            d = math.inf
            for p in poles:
                d = min(d, abs(p.location.real - s))
                if self.factors[p.factor].power > 1:
                    crossed = (p.family == "left") == (p.location.real > s)
                    bad = bad or crossed
            if bad:
                continue
            score = min(d, 0.2) - 0.01 * abs(s)
            if score > best_score:
                best, best_score = float(s), score
        if best_score == -math.inf:
            raise CollisionError("no admissible contour: a repeated Gamma pole must be crossed")
        return best

    def corrections(self, sigma: float) -> list[tuple[Pole, int]]:
        """Poles on the wrong side of Re z = sigma with their signs (+1 left, -1 right)."""
        out = []
        for p in self.poles(-200.0, 200.0):
            if p.family == "left" and p.location.real > sigma:
                out.append((p, +1))
            elif p.family == "right" and p.location.real < sigma:
                out.append((p, -1))
        return out

    def residue_sum(self, corrections, radius: float = COLLISION_RADIUS) -> tuple[complex, tuple]:
        """Signed residue corrections, clustering colliding poles into circles."""
        remaining = list(corrections)
        terms = []
        total = 0j
        all_poles = [q.location for q in self.poles(-200.0, 200.0)]
        while remaining:
            p, sign = remaining.pop(0)
            cluster = [(p, sign)]
            keep = []
            for q, sq in remaining:
                if abs(q.location - p.location) < radius:
                    cluster.append((q, sq))
                else:
                    keep.append((q, sq))
            remaining = keep
            if len(cluster) == 1:
                try:
                    r = gamma_product_residue(self.factors, self.extra, p.location)
                    total += sign * r
                    terms.append((p.location, sign, r))
                    continue
                except CollisionError:
                    pass
            signs = {s for _, s in cluster}
            if len(signs) > 1:
                raise CollisionError("left and right pole families pinch the contour")
            centre = complex(np.mean([q.location for q, _ in cluster]))
            members = {q.location for q, _ in cluster}
            # every singular point inside the circle must be one we intend to count
            others = [z for z in all_poles if abs(z - centre) < 2 * radius and z not in members]
            if any(min(abs(z - m) for m in members) > EPS_COLLISION for z in others):
                raise CollisionError("a non-crossed pole pinches the contour")
            res = integrate_circle(
                self, ContourSpec.circle(radius=radius, center=centre, rel_tol=1e-12)
            )
            total += sign * res.value
            terms.append((centre, sign, res.value))
        return total, tuple(terms)

    def continued_integral(
        self, rel_tol: float = 1e-10, sigma: float | None = None, max_nodes: int = 2**18
    ) -> ContinuedIntegral:
        """Analytic continuation of (1/2 pi i) int_{iR} F(z) dz.

        The value equals the integral over any contour separating the left
        pole families from the right ones; it is computed on a vertical line
        plus signed residues at the poles lying on the wrong side of it.
        """
        if sigma is None:
            sigma = self.choose_sigma()
        spec = ContourSpec.vertical(
            real_part=sigma, decay_rate=self.decay_rate, rel_tol=rel_tol, max_nodes=max_nodes
        )
        line = integrate_vertical(self, spec, decay_rate=self.decay_rate)
        corr, terms = self.residue_sum(self.corrections(sigma))
        return ContinuedIntegral(line.value + corr, line, terms, sigma)
