"""Parameter records shared by the two-layer, formula and simulation modules."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

__all__ = ["ParameterError", "GeoParams", "LGParams", "KpzParams"]


class ParameterError(ValueError):
    """A parameter invariant is violated."""


def _tuple(x) -> tuple:
    if isinstance(x, (int, float)):
        return (float(x),)
    return tuple(float(v) for v in x)


@dataclass(frozen=True)
class GeoParams:
    """Geometric model: bulk rates a_1..a_N, boundary parameters c1 (left), c2 (right)."""

    a: tuple
    c1: float
    c2: float

    def __post_init__(self):
        object.__setattr__(self, "a", _tuple(self.a))
        if not self.a:
            raise ParameterError("need at least one bulk parameter a")
        if any(not 0.0 <= x < 1.0 for x in self.a):
            raise ParameterError("bulk parameters must lie in [0, 1)")
        if self.c1 < 0 or self.c2 < 0:
            raise ParameterError("c1 and c2 must be nonnegative")
        for x in self.a:
            if x * self.c1 >= 1:
                raise ParameterError(f"a*c1 >= 1 (a={x}, c1={self.c1})")
            if x * self.c2 >= 1:
                raise ParameterError(f"a*c2 >= 1 (a={x}, c2={self.c2})")

    @classmethod
    def homogeneous(cls, a: float, N: int, c1: float, c2: float) -> "GeoParams":
        return cls((a,) * N, c1, c2)

    @property
    def N(self) -> int:
        return len(self.a)

    @property
    def is_homogeneous(self) -> bool:
        return len(set(self.a)) == 1

    def rates(self, N: int | None = None) -> tuple:
        """The first N bulk parameters (a single value is broadcast)."""
        if N is None:
            return self.a
        if len(self.a) == 1:
            return self.a * N
        if N > len(self.a):
            raise ParameterError(f"need {N} bulk parameters, have {len(self.a)}")
        return self.a[:N]

    def require_direct(self):
        if not (self.c1 < 1 and self.c2 < 1):
            raise ParameterError(
                "c1, c2 < 1 required: the continuation to c1 or c2 > 1 is not implemented"
            )
        if self.c1 * self.c2 >= 1:
            raise ParameterError("c1*c2 >= 1")


@dataclass(frozen=True)
class LGParams:
    """Log-gamma model: bulk parameters alpha_1..alpha_N, boundary parameters u (left), v (right)."""

    alphas: tuple
    u: float
    v: float

    def __post_init__(self):
        object.__setattr__(self, "alphas", _tuple(self.alphas))
        if not self.alphas:
            raise ParameterError("need at least one bulk parameter alpha")
        if any(x <= 0 for x in self.alphas):
            raise ParameterError("alpha parameters must be positive")
        for x in self.alphas:
            if x + self.u <= 0:
                raise ParameterError(f"alpha+u <= 0 (alpha={x}, u={self.u})")
            if x + self.v <= 0:
                raise ParameterError(f"alpha+v <= 0 (alpha={x}, v={self.v})")

    @classmethod
    def homogeneous(cls, alpha: float, N: int, u: float, v: float) -> "LGParams":
        return cls((alpha,) * N, u, v)

    @property
    def N(self) -> int:
        return len(self.alphas)

    @property
    def is_homogeneous(self) -> bool:
        return len(set(self.alphas)) == 1

    def rates(self, N: int | None = None) -> tuple:
        if N is None:
            return self.alphas
        if len(self.alphas) == 1:
            return self.alphas * N
        if N > len(self.alphas):
            raise ParameterError(f"need {N} bulk parameters, have {len(self.alphas)}")
        return self.alphas[:N]

    def require_direct(self):
        if not (self.u > 0 and self.v > 0):
            raise ParameterError("u, v > 0 required for the direct contour integral")


@dataclass(frozen=True)
class KpzParams:
    u: float
    v: float
    L: float

    def __post_init__(self):
        if not self.L > 0:
            raise ParameterError("L must be positive")
