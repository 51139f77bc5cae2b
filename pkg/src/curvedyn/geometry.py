"""Riemannian structure in geodesic polar coordinates (r, theta, phi).

Covers the metric and volume density, the six Killing vector fields with
numeric Lie brackets, the forces of free geodesic motion, the Legendre
map between velocity and momentum descriptions, and two alternative
radial charts (rho = sin_k(r) and R = tan_k(r)) with their canonical
momentum transforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kappa_core import (
    DomainSingularity,
    arcsin_k,
    arctan_k,
    cos_k,
    sin_k,
    tan_k,
)

__all__ = [
    "ConfigPoint",
    "PhaseState",
    "VelocityState",
    "TangentVector",
    "KILLING_IDS",
    "metric_coeffs",
    "volume_density",
    "killing_field",
    "lie_bracket_numeric",
    "lie_derivative_metric",
    "volume_divergence",
    "geodesic_forces",
    "geodesic_rhs",
    "legendre",
    "legendre_inv",
    "to_rho_chart",
    "from_rho_chart",
    "to_R_chart",
    "from_R_chart",
    "rho_chart_kinetic",
    "R_chart_kinetic",
    "kinetic_energy",
]

# Below this, 1/sin(theta) and 1/sin_k(r) factors are treated as singular.
_EPS_SING = 1e-12

KILLING_IDS = ("X1", "X2", "X3", "Y1", "Y2", "Y3")


@dataclass(frozen=True)
class ConfigPoint:
    """Configuration point: geodesic distance r and angles (theta, phi)."""

    r: float
    theta: float
    phi: float

    def is_valid(self, kappa: float) -> bool:
        if not (self.r > 0.0 and 0.0 < self.theta < math.pi):
            return False
        if kappa > 0.0 and self.r >= math.pi / math.sqrt(kappa):
            return False
        return all(math.isfinite(v) for v in (self.r, self.theta, self.phi))


@dataclass(frozen=True)
class PhaseState:
    """Configuration point plus canonical momenta."""

    q: ConfigPoint
    p_r: float
    p_theta: float
    p_phi: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.q.r, self.q.theta, self.q.phi, self.p_r, self.p_theta, self.p_phi]
        )

    @classmethod
    def from_array(cls, y) -> "PhaseState":
        r, th, ph, pr, pth, pph = (float(v) for v in y)
        return cls(ConfigPoint(r, th, ph), pr, pth, pph)


@dataclass(frozen=True)
class VelocityState:
    """Configuration point plus coordinate velocities."""

    q: ConfigPoint
    v_r: float
    v_theta: float
    v_phi: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.q.r, self.q.theta, self.q.phi, self.v_r, self.v_theta, self.v_phi]
        )

    @classmethod
    def from_array(cls, y) -> "VelocityState":
        r, th, ph, vr, vth, vph = (float(v) for v in y)
        return cls(ConfigPoint(r, th, ph), vr, vth, vph)


@dataclass(frozen=True)
class TangentVector:
    """Vector components (a_r, a_theta, a_phi) at a configuration point."""

    a_r: float
    a_theta: float
    a_phi: float

    def as_array(self) -> np.ndarray:
        return np.array([self.a_r, self.a_theta, self.a_phi])


def metric_coeffs(kappa, q: ConfigPoint) -> tuple[float, float, float]:
    """Diagonal metric coefficients (g_rr, g_thth, g_phph)."""
    s = sin_k(kappa, q.r)
    sth = math.sin(q.theta)
    return 1.0, s * s, s * s * sth * sth


def volume_density(kappa, q: ConfigPoint) -> float:
    """Riemannian volume density sin_k^2(r) sin(theta)."""
    s = sin_k(kappa, q.r)
    return s * s * math.sin(q.theta)


def _killing_components(fid: str, kappa: float, r: float, th: float, ph: float):
    sth, cth = math.sin(th), math.cos(th)
    sph, cph = math.sin(ph), math.cos(ph)
    if fid in ("X1", "X2", "X3"):
        s = sin_k(kappa, r)
        if abs(s) < _EPS_SING:
            raise DomainSingularity("Killing X fields singular at sin_k(r) = 0")
        ct = cos_k(kappa, r) / s
        if fid == "X3":
            return cth, -ct * sth, 0.0
        if abs(sth) < _EPS_SING:
            raise DomainSingularity("Killing X1/X2 singular at sin(theta) = 0")
        if fid == "X1":
            return sth * cph, ct * cth * cph, -ct * sph / sth
        return sth * sph, ct * cth * sph, ct * cph / sth
    if fid == "Y3":
        return 0.0, 0.0, 1.0
    if abs(sth) < _EPS_SING:
        raise DomainSingularity("Killing Y1/Y2 singular at sin(theta) = 0")
    cot = cth / sth
    if fid == "Y1":
        return 0.0, -sph, -cph * cot
    if fid == "Y2":
        return 0.0, cph, -sph * cot
    raise ValueError(f"unknown Killing field id {fid!r}")


def killing_field(fid: str, kappa, q: ConfigPoint) -> TangentVector:
    """One of the six Killing vector fields X1..X3, Y1..Y3 at q."""
    return TangentVector(*_killing_components(fid, float(kappa), q.r, q.theta, q.phi))


def lie_bracket_numeric(
    fid_a: str, fid_b: str, kappa, q: ConfigPoint, h: float = 1e-5
) -> TangentVector:
    """Commutator [A, B]^i = A^j d_j B^i - B^j d_j A^i by central differences."""
    kap = float(kappa)
    x0 = (q.r, q.theta, q.phi)

    def comp(fid, x):
        return np.array(_killing_components(fid, kap, *x))

    a0 = comp(fid_a, x0)
    b0 = comp(fid_b, x0)
    out = np.zeros(3)
    for j in range(3):
        xp = list(x0)
        xm = list(x0)
        xp[j] += h
        xm[j] -= h
        da = (comp(fid_a, xp) - comp(fid_a, xm)) / (2.0 * h)
        db = (comp(fid_b, xp) - comp(fid_b, xm)) / (2.0 * h)
        out += a0[j] * db - b0[j] * da
    return TangentVector(*out)


def lie_derivative_metric(fid: str, kappa, q: ConfigPoint, h: float = 1e-5) -> np.ndarray:
    """Lie derivative of the metric along a Killing field, by central differences.

    Returns the symmetric 3x3 matrix X^c d_c g_ab + g_cb d_a X^c + g_ac d_b X^c,
    which vanishes exactly for isometry generators.
    """
    kap = float(kappa)
    x0 = (q.r, q.theta, q.phi)

    def g_at(x):
        return np.diag(metric_coeffs(kap, ConfigPoint(*x)))

    def x_at(x):
        return np.array(_killing_components(fid, kap, *x))

    g0 = g_at(x0)
    x_field = x_at(x0)
    out = np.zeros((3, 3))
    dg = np.zeros((3, 3, 3))
    dx = np.zeros((3, 3))
    for c in range(3):
        xp = list(x0)
        xm = list(x0)
        xp[c] += h
        xm[c] -= h
        dg[c] = (g_at(xp) - g_at(xm)) / (2.0 * h)
        dx[c] = (x_at(xp) - x_at(xm)) / (2.0 * h)
    for a in range(3):
        for b in range(3):
            term = sum(x_field[c] * dg[c, a, b] for c in range(3))
            term += sum(g0[c, b] * dx[a, c] for c in range(3))
            term += sum(g0[a, c] * dx[b, c] for c in range(3))
            out[a, b] = term
    return out


def volume_divergence(fid: str, kappa, q: ConfigPoint, h: float = 1e-5) -> float:
    """Divergence of a Killing field with respect to the volume density."""
    kap = float(kappa)
    x0 = (q.r, q.theta, q.phi)

    def flux(x):
        w = volume_density(kap, ConfigPoint(*x))
        return w * np.array(_killing_components(fid, kap, *x))

    total = 0.0
    for j in range(3):
        xp = list(x0)
        xm = list(x0)
        xp[j] += h
        xm[j] -= h
        total += (flux(xp)[j] - flux(xm)[j]) / (2.0 * h)
    return total / volume_density(kap, q)


def geodesic_forces(kappa, s: VelocityState) -> tuple[float, float, float]:
    """Accelerations (f_r, f_theta, f_phi) of free geodesic motion."""
    kap = float(kappa)
    r, th = s.q.r, s.q.theta
    sk = sin_k(kap, r)
    sth = math.sin(th)
    if abs(sk) < _EPS_SING or abs(sth) < _EPS_SING:
        raise DomainSingularity("geodesic forces singular at sin_k(r) = 0 or sin(theta) = 0")
    ck = cos_k(kap, r)
    cth = math.cos(th)
    inv_tk = ck / sk
    cot_th = cth / sth
    f_r = ck * sk * (s.v_theta**2 + sth * sth * s.v_phi**2)
    f_th = -2.0 * inv_tk * s.v_r * s.v_theta + cth * sth * s.v_phi**2
    f_ph = -2.0 * (inv_tk * s.v_r + cot_th * s.v_theta) * s.v_phi
    return f_r, f_th, f_ph


def geodesic_rhs(kappa, y: np.ndarray) -> np.ndarray:
    """First-order form of geodesic motion on (r, theta, phi, v_r, v_theta, v_phi)."""
    s = VelocityState.from_array(y)
    f = geodesic_forces(kappa, s)
    return np.array([s.v_r, s.v_theta, s.v_phi, f[0], f[1], f[2]])


def kinetic_energy(kappa, s: VelocityState) -> float:
    """Kinetic energy of a velocity state under the metric."""
    g1, g2, g3 = metric_coeffs(kappa, s.q)
    return 0.5 * (g1 * s.v_r**2 + g2 * s.v_theta**2 + g3 * s.v_phi**2)


def legendre(kappa, s: VelocityState) -> PhaseState:
    """Velocities to canonical momenta: p = g v."""
    g1, g2, g3 = metric_coeffs(kappa, s.q)
    return PhaseState(s.q, g1 * s.v_r, g2 * s.v_theta, g3 * s.v_phi)


def legendre_inv(kappa, s: PhaseState) -> VelocityState:
    """Canonical momenta to velocities: v = g^-1 p."""
    g1, g2, g3 = metric_coeffs(kappa, s.q)
    if g2 < _EPS_SING**2 or g3 < _EPS_SING**2:
        raise DomainSingularity("degenerate metric: sin_k(r) or sin(theta) vanishes")
    return VelocityState(s.q, s.p_r / g1, s.p_theta / g2, s.p_phi / g3)


def _cos_guard(kappa, r: float) -> float:
    # The radial charts use the principal branch cos_k(r) > 0; for
    # kappa > 0 that restricts them to the hemisphere r < pi/(2 sqrt(kappa)).
    c = cos_k(kappa, r)
    if c < 1e-10:
        raise DomainSingularity("chart transform requires cos_k(r) > 0")
    return c


def to_rho_chart(kappa, s: PhaseState) -> PhaseState:
    """Radial chart rho = sin_k(r) with canonical p_rho = p_r / cos_k(r)."""
    c = _cos_guard(kappa, s.q.r)
    rho = sin_k(kappa, s.q.r)
    return PhaseState(ConfigPoint(rho, s.q.theta, s.q.phi), s.p_r / c, s.p_theta, s.p_phi)


def from_rho_chart(kappa, s: PhaseState) -> PhaseState:
    """Inverse of to_rho_chart on the principal branch cos_k(r) > 0."""
    r = arcsin_k(kappa, s.q.r)
    c = _cos_guard(kappa, r)
    return PhaseState(ConfigPoint(r, s.q.theta, s.q.phi), s.p_r * c, s.p_theta, s.p_phi)


def to_R_chart(kappa, s: PhaseState) -> PhaseState:
    """Radial chart R = tan_k(r) with canonical p_R = p_r cos_k^2(r)."""
    c = _cos_guard(kappa, s.q.r)
    big_r = tan_k(kappa, s.q.r)
    return PhaseState(ConfigPoint(big_r, s.q.theta, s.q.phi), s.p_r * c * c, s.p_theta, s.p_phi)


def from_R_chart(kappa, s: PhaseState) -> PhaseState:
    """Inverse of to_R_chart on the principal branch."""
    r = arctan_k(kappa, s.q.r)
    c = _cos_guard(kappa, r)
    return PhaseState(ConfigPoint(r, s.q.theta, s.q.phi), s.p_r / (c * c), s.p_theta, s.p_phi)


def rho_chart_kinetic(kappa, s: PhaseState) -> float:
    """Kinetic energy in the rho chart: (1 - kappa rho^2) p_rho^2/2 + angular part."""
    kap = float(kappa)
    rho, th = s.q.r, s.q.theta
    sth = math.sin(th)
    if abs(rho) < _EPS_SING or abs(sth) < _EPS_SING:
        raise DomainSingularity("rho chart kinetic singular")
    ang = s.p_theta**2 + (s.p_phi / sth) ** 2
    return 0.5 * ((1.0 - kap * rho * rho) * s.p_r**2 + ang / (rho * rho))


def R_chart_kinetic(kappa, s: PhaseState) -> float:
    """Kinetic energy in the R chart: (1 + kappa R^2)^2 p_R^2/2 + angular part."""
    kap = float(kappa)
    big_r, th = s.q.r, s.q.theta
    sth = math.sin(th)
    if abs(big_r) < _EPS_SING or abs(sth) < _EPS_SING:
        raise DomainSingularity("R chart kinetic singular")
    lam = 1.0 + kap * big_r * big_r
    ang = s.p_theta**2 + (s.p_phi / sth) ** 2
    return 0.5 * (lam * lam * s.p_r**2 + lam * ang / (big_r * big_r))
