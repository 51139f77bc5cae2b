"""Curvature-parametrized trigonometric kernels.

A single real parameter kappa selects the geometry: positive for the
sphere, zero for Euclidean space, negative for hyperbolic space.  The
kernels cos_k, sin_k, tan_k interpolate between circular and hyperbolic
functions and reduce smoothly to (1, x, x) at kappa = 0.  Near kappa = 0
the closed forms lose digits to cancellation, so a truncated series in
kappa is used instead; the switch is exact to double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "Curvature",
    "DomainSingularity",
    "EPS_DOM",
    "SMALL_KAPPA_X2",
    "cos_k",
    "sin_k",
    "tan_k",
    "d_cos_k",
    "d_sin_k",
    "d_tan_k",
    "arcsin_k",
    "arctan_k",
]

# Guard on |cos_k| below which tan_k is treated as singular.
EPS_DOM = 1e-10

# Series branch threshold on |kappa| * x^2.
SMALL_KAPPA_X2 = 1e-6


class DomainSingularity(ValueError):
    """Raised when an evaluation point sits on a genuine singularity."""


@dataclass(frozen=True)
class Curvature:
    """Validated curvature parameter with a sign classification."""

    kappa: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.kappa):
            raise ValueError("curvature must be finite")

    @property
    def classification(self) -> str:
        if self.kappa > 0.0:
            return "spherical"
        if self.kappa < 0.0:
            return "hyperbolic"
        return "euclidean"

    def __float__(self) -> float:
        return self.kappa


def _as_kappa(kappa) -> float:
    return float(kappa)


def cos_k(kappa, x: float) -> float:
    """cos(sqrt(kappa) x), continued through kappa <= 0."""
    kap = _as_kappa(kappa)
    u = kap * x * x
    if abs(u) < SMALL_KAPPA_X2:
        # 1 - u/2 + u^2/24; next term u^3/720 is below roundoff here.
        return 1.0 - u / 2.0 + u * u / 24.0
    if kap > 0.0:
        return math.cos(math.sqrt(kap) * x)
    return math.cosh(math.sqrt(-kap) * x)


def sin_k(kappa, x: float) -> float:
    """sin(sqrt(kappa) x)/sqrt(kappa), continued through kappa <= 0."""
    kap = _as_kappa(kappa)
    u = kap * x * x
    if abs(u) < SMALL_KAPPA_X2:
        return x * (1.0 - u / 6.0 + u * u / 120.0)
    if kap > 0.0:
        rk = math.sqrt(kap)
        return math.sin(rk * x) / rk
    rk = math.sqrt(-kap)
    return math.sinh(rk * x) / rk


def tan_k(kappa, x: float, eps: float = EPS_DOM) -> float:
    """sin_k / cos_k, singular where cos_k vanishes."""
    c = cos_k(kappa, x)
    if abs(c) < eps:
        raise DomainSingularity(f"tan_k singular: |cos_k({float(kappa)}, {x})| < {eps}")
    return sin_k(kappa, x) / c


def d_sin_k(kappa, x: float) -> float:
    """Derivative of sin_k in x, equal to cos_k."""
    return cos_k(kappa, x)


def d_cos_k(kappa, x: float) -> float:
    """Derivative of cos_k in x, equal to -kappa sin_k."""
    return -_as_kappa(kappa) * sin_k(kappa, x)


def d_tan_k(kappa, x: float, eps: float = EPS_DOM) -> float:
    """Derivative of tan_k in x, equal to 1/cos_k^2."""
    c = cos_k(kappa, x)
    if abs(c) < eps:
        raise DomainSingularity(f"d_tan_k singular: |cos_k({float(kappa)}, {x})| < {eps}")
    return 1.0 / (c * c)


def arcsin_k(kappa, y: float) -> float:
    """Inverse of sin_k on the principal branch."""
    kap = _as_kappa(kappa)
    u = kap * y * y
    if abs(u) < SMALL_KAPPA_X2:
        return y * (1.0 + u / 6.0 + 3.0 * u * u / 40.0)
    if kap > 0.0:
        rk = math.sqrt(kap)
        arg = rk * y
        if abs(arg) > 1.0:
            raise DomainSingularity(f"arcsin_k out of range: |sqrt(kappa) y| = {abs(arg)} > 1")
        return math.asin(arg) / rk
    rk = math.sqrt(-kap)
    return math.asinh(rk * y) / rk


def arctan_k(kappa, y: float) -> float:
    """Inverse of tan_k on the principal branch."""
    kap = _as_kappa(kappa)
    u = kap * y * y
    if abs(u) < SMALL_KAPPA_X2:
        return y * (1.0 - u / 3.0 + u * u / 5.0)
    if kap > 0.0:
        rk = math.sqrt(kap)
        return math.atan(rk * y) / rk
    rk = math.sqrt(-kap)
    arg = rk * y
    if abs(arg) >= 1.0:
        raise DomainSingularity(f"arctan_k out of range: |sqrt(-kappa) y| = {abs(arg)} >= 1")
    return math.atanh(arg) / rk
