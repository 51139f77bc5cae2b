"""Named phase-space functions with values and analytic 6-gradients.

Every conserved quantity handled by the library lives here: Noether
momenta, angular momenta, curvature-scaled Cartesian coordinates, the
symmetric quadratic tensor of the isotropic oscillator, angular-momentum
and Runge-Lenz style integrals of the coupled systems, and the complex
combinations whose moduli are conserved.  Each observable carries a
hand-derived closed-form gradient with respect to
(r, theta, phi, p_r, p_theta, p_phi); composites assemble primitive
gradients through explicit product, quotient, and chain rules.  A finite
difference cross-check of every gradient lives in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import PhaseState, ConfigPoint
from .kappa_core import DomainSingularity, EPS_DOM, cos_k, sin_k

__all__ = [
    "Observable",
    "ComplexObservable",
    "FradkinMatrix",
    "UnsupportedEntry",
    "NegativeCoupling",
    "noether_P",
    "angular_J",
    "angular_J_squared",
    "kappa_cartesian",
    "coordinate",
    "direction_cosine",
    "kinetic",
    "fradkin_K",
    "fradkin_matrix",
    "complex_M",
    "sw_KJ",
    "osc112_observables",
    "kepler_RL",
    "k123_R",
    "k123_S",
    "k123_N",
    "k123_KR",
    "analytic_gradient",
    "scaled_sum",
    "square",
]

_EPS = 1e-12


class UnsupportedEntry(ValueError):
    """Off-diagonal quadratic-tensor entries exist only without couplings."""


class NegativeCoupling(ValueError):
    """Complex pairings need nonnegative couplings under the square root."""


def _as6(s) -> tuple[float, float, float, float, float, float]:
    if isinstance(s, PhaseState):
        return (s.q.r, s.q.theta, s.q.phi, s.p_r, s.p_theta, s.p_phi)
    return (float(s[0]), float(s[1]), float(s[2]), float(s[3]), float(s[4]), float(s[5]))


@dataclass(frozen=True)
class Observable:
    """Real phase-space function with value and analytic gradient."""

    name: str
    params: dict = field(compare=False)
    _vg: Callable = field(repr=False, compare=False)

    def value(self, s) -> float:
        return self._vg(_as6(s))[0]

    def gradient(self, s) -> np.ndarray:
        return self._vg(_as6(s))[1]

    def value_and_gradient(self, s) -> tuple[float, np.ndarray]:
        return self._vg(_as6(s))


@dataclass(frozen=True)
class ComplexObservable:
    """Complex function exposed as a pair of real observables."""

    name: str
    re: Observable
    im: Observable

    def value(self, s) -> complex:
        return complex(self.re.value(s), self.im.value(s))


def analytic_gradient(obs: Observable, s) -> np.ndarray:
    """Closed-form 6-gradient of an observable at a state."""
    return obs.gradient(s)


# ---------------------------------------------------------------------------
# Primitive value-and-gradient pieces.  Each returns (value, 6-gradient).

def _sin_guard(x: float, what: str) -> None:
    if abs(x) < _EPS:
        raise DomainSingularity(f"{what} vanishes")


def _p_vg(i: int, kap: float, y) -> tuple[float, np.ndarray]:
    r, th, ph, pr, pth, pph = y
    sk = sin_k(kap, r)
    _sin_guard(sk, "sin_k(r)")
    ck = cos_k(kap, r)
    ct = ck / sk
    dct = -1.0 / (sk * sk)
    sth, cth = math.sin(th), math.cos(th)
    sph, cph = math.sin(ph), math.cos(ph)
    g = np.zeros(6)
    if i == 3:
        val = cth * pr - ct * sth * pth
        g[0] = -dct * sth * pth
        g[1] = -sth * pr - ct * cth * pth
        g[3] = cth
        g[4] = -ct * sth
        return val, g
    _sin_guard(sth, "sin(theta)")
    if i == 1:
        ang = cth * cph * pth - (sph / sth) * pph
        val = sth * cph * pr + ct * ang
        g[0] = dct * ang
        g[1] = cth * cph * pr + ct * (-sth * cph * pth + (cth / (sth * sth)) * sph * pph)
        g[2] = -sth * sph * pr + ct * (-cth * sph * pth - (cph / sth) * pph)
        g[3] = sth * cph
        g[4] = ct * cth * cph
        g[5] = -ct * sph / sth
        return val, g
    if i == 2:
        ang = cth * sph * pth + (cph / sth) * pph
        val = sth * sph * pr + ct * ang
        g[0] = dct * ang
        g[1] = cth * sph * pr + ct * (-sth * sph * pth - (cth / (sth * sth)) * cph * pph)
        g[2] = sth * cph * pr + ct * (cth * cph * pth - (sph / sth) * pph)
        g[3] = sth * sph
        g[4] = ct * cth * sph
        g[5] = ct * cph / sth
        return val, g
    raise ValueError(f"momentum index must be 1..3, got {i}")


def _j_vg(i: int, y) -> tuple[float, np.ndarray]:
    _, th, ph, _, pth, pph = y
    g = np.zeros(6)
    if i == 3:
        g[5] = 1.0
        return pph, g
    sth, cth = math.sin(th), math.cos(th)
    _sin_guard(sth, "sin(theta)")
    sph, cph = math.sin(ph), math.cos(ph)
    cot = cth / sth
    if i == 1:
        val = -(sph * pth + cot * cph * pph)
        g[1] = cph * pph / (sth * sth)
        g[2] = -cph * pth + cot * sph * pph
        g[4] = -sph
        g[5] = -cot * cph
        return val, g
    if i == 2:
        val = cph * pth - cot * sph * pph
        g[1] = sph * pph / (sth * sth)
        g[2] = -sph * pth - cot * cph * pph
        g[4] = cph
        g[5] = -cot * sph
        return val, g
    raise ValueError(f"angular index must be 1..3, got {i}")


def _jsq_vg(y) -> tuple[float, np.ndarray]:
    _, th, _, _, pth, pph = y
    sth, cth = math.sin(th), math.cos(th)
    _sin_guard(sth, "sin(theta)")
    g = np.zeros(6)
    val = pth * pth + (pph / sth) ** 2
    g[1] = -2.0 * pph * pph * cth / sth**3
    g[4] = 2.0 * pth
    g[5] = 2.0 * pph / (sth * sth)
    return val, g


def _dir_vg(axis: int, y) -> tuple[float, np.ndarray]:
    _, th, ph = y[0], y[1], y[2]
    sth, cth = math.sin(th), math.cos(th)
    sph, cph = math.sin(ph), math.cos(ph)
    g = np.zeros(6)
    if axis == 0:
        g[1] = cth * cph
        g[2] = -sth * sph
        return sth * cph, g
    if axis == 1:
        g[1] = cth * sph
        g[2] = sth * cph
        return sth * sph, g
    if axis == 2:
        g[1] = -sth
        return cth, g
    raise ValueError(f"axis must be 0..2, got {axis}")


def _coord_vg(axis: int, kap: float, y) -> tuple[float, np.ndarray]:
    r = y[0]
    sk = sin_k(kap, r)
    ck = cos_k(kap, r)
    d, gd = _dir_vg(axis, y)
    g = sk * gd
    g[0] = ck * d
    return sk * d, g


def _kinetic_vg(kap: float, y) -> tuple[float, np.ndarray]:
    r, th, _, pr, pth, pph = y
    sk = sin_k(kap, r)
    _sin_guard(sk, "sin_k(r)")
    sth, cth = math.sin(th), math.cos(th)
    _sin_guard(sth, "sin(theta)")
    ck = cos_k(kap, r)
    sk2 = sk * sk
    ang = pth * pth + (pph / sth) ** 2
    g = np.zeros(6)
    g[0] = -ck * ang / (sk2 * sk)
    g[1] = -pph * pph * cth / (sk2 * sth**3)
    g[3] = pr
    g[4] = pth / sk2
    g[5] = pph / (sk2 * sth * sth)
    return 0.5 * (pr * pr + ang / sk2), g


def _az_vg(kap: float, y) -> tuple[float, np.ndarray]:
    r, th = y[0], y[1]
    ck = cos_k(kap, r)
    if abs(ck) < EPS_DOM:
        raise DomainSingularity("axial anisotropy factor singular at cos_k(r) = 0")
    sk = sin_k(kap, r)
    tk = sk / ck
    sth, cth = math.sin(th), math.cos(th)
    u = tk * cth
    den = 1.0 - kap * u * u
    if abs(den) < _EPS:
        raise DomainSingularity("axial anisotropy factor denominator vanishes")
    dadu = (1.0 + kap * u * u) / (den * den)
    g = np.zeros(6)
    g[0] = dadu * cth / (ck * ck)
    g[1] = -dadu * tk * sth
    return u / den, g


def _tan_dir_vg(axis: int, kap: float, y) -> tuple[float, np.ndarray]:
    """tan_k(r) times a direction cosine, with gradient."""
    r = y[0]
    ck = cos_k(kap, r)
    if abs(ck) < EPS_DOM:
        raise DomainSingularity("tan_k(r) singular at cos_k(r) = 0")
    tk = sin_k(kap, r) / ck
    d, gd = _dir_vg(axis, y)
    g = tk * gd
    g[0] = d / (ck * ck)
    return tk * d, g


# ---------------------------------------------------------------------------
# Observable constructors.

def noether_P(i: int, kappa) -> Observable:
    """Noether momentum P_i generated by the curvature-dependent isometries."""
    kap = float(kappa)
    return Observable(f"P{i}", {"kappa": kap}, lambda y: _p_vg(i, kap, y))


def angular_J(i: int) -> Observable:
    """Angular momentum component J_i (curvature independent)."""
    return Observable(f"J{i}", {}, lambda y: _j_vg(i, y))


def angular_J_squared() -> Observable:
    """Total squared angular momentum J1^2 + J2^2 + J3^2."""
    return Observable("Jsq", {}, _jsq_vg)


def coordinate(axis: int, kappa) -> Observable:
    """Curvature-scaled Cartesian coordinate sin_k(r) times a direction cosine."""
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1..3, got {axis}")
    kap = float(kappa)
    name = ("xk", "yk", "zk")[axis - 1]
    return Observable(name, {"kappa": kap}, lambda y: _coord_vg(axis - 1, kap, y))


def direction_cosine(axis: int) -> Observable:
    """Unit-vector component of the configuration ray."""
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1..3, got {axis}")
    name = ("dx", "dy", "dz")[axis - 1]
    return Observable(name, {}, lambda y: _dir_vg(axis - 1, y))


def kappa_cartesian(kappa, q: ConfigPoint) -> tuple[float, float, float]:
    """Values (x_k, y_k, z_k) of the curvature-scaled Cartesian coordinates."""
    kap = float(kappa)
    sk = sin_k(kap, q.r)
    sth, cth = math.sin(q.theta), math.cos(q.theta)
    sph, cph = math.sin(q.phi), math.cos(q.phi)
    return sk * sth * cph, sk * sth * sph, sk * cth


def kinetic(kappa) -> Observable:
    """Kinetic energy of the canonical momenta under the metric."""
    kap = float(kappa)
    return Observable("T", {"kappa": kap}, lambda y: _kinetic_vg(kap, y))


def fradkin_K(i: int, j: int, kappa, alpha, k1=0.0, k2=0.0, k3=0.0) -> Observable:
    """Quadratic-tensor entry K_ij of the oscillator family.

    Diagonal entries optionally carry the 2 k_i / (tan_k(r) dir_i)^2
    coupling terms; off-diagonal entries are defined only when all
    couplings vanish.
    """
    kap = float(kappa)
    al = float(alpha)
    ks = (float(k1), float(k2), float(k3))
    if i != j and any(ks):
        raise UnsupportedEntry("off-diagonal entries require k1 = k2 = k3 = 0")
    ia, ja = i - 1, j - 1
    ki = ks[ia]

    def vg(y):
        pi, gpi = _p_vg(i, kap, y)
        ck = cos_k(kap, y[0])
        if abs(ck) < EPS_DOM:
            raise DomainSingularity("tan_k(r) singular at cos_k(r) = 0")
        tk = sin_k(kap, y[0]) / ck
        di, gdi = _dir_vg(ia, y)
        if i == j:
            val = pi * pi + (al * tk * di) ** 2
            g = 2.0 * pi * gpi + al * al * tk * (2.0 * tk * di * gdi)
            g[0] += 2.0 * al * al * tk * di * di / (ck * ck)
            if ki != 0.0:
                w = tk * di
                _sin_guard(w, "tan_k(r) dir_i")
                val += 2.0 * ki / (w * w)
                gw = tk * gdi
                gw[0] += di / (ck * ck)
                g += (-4.0 * ki / w**3) * gw
            return val, g
        pj, gpj = _p_vg(j, kap, y)
        dj, gdj = _dir_vg(ja, y)
        val = pi * pj + al * al * tk * tk * di * dj
        g = pi * gpj + pj * gpi + al * al * tk * tk * (di * gdj + dj * gdi)
        g[0] += 2.0 * al * al * tk * di * dj / (ck * ck)
        return val, g

    params = {"kappa": kap, "alpha": al}
    if any(ks):
        params.update({"k1": ks[0], "k2": ks[1], "k3": ks[2]})
    return Observable(f"K{i}{j}", params, vg)


@dataclass(frozen=True)
class FradkinMatrix:
    """Symmetric 3x3 matrix of oscillator quadratic-tensor entries at a state."""

    entries: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.array(self.entries)

    def det(self) -> float:
        return float(np.linalg.det(self.entries))


def fradkin_matrix(kappa, alpha, s) -> FradkinMatrix:
    """Evaluate all six K_ij entries of the pure oscillator at a state."""
    m = np.empty((3, 3))
    for i in range(1, 4):
        m[i - 1, i - 1] = fradkin_K(i, i, kappa, alpha).value(s)
    for i, j in ((1, 2), (2, 3), (3, 1)):
        v = fradkin_K(i, j, kappa, alpha).value(s)
        m[i - 1, j - 1] = v
        m[j - 1, i - 1] = v
    return FradkinMatrix(m)


def complex_M(j: int, kappa, alpha) -> ComplexObservable:
    """Complex pairing P_j + i alpha tan_k(r) dir_j of the oscillator."""
    kap = float(kappa)
    al = float(alpha)
    re = noether_P(j, kap)

    def im_vg(y):
        v, g = _tan_dir_vg(j - 1, kap, y)
        return al * v, al * g

    im = Observable(f"ImM{j}", {"kappa": kap, "alpha": al}, im_vg)
    return ComplexObservable(f"M{j}", re, im)


_KJ_TERMS = {
    # KJ_i pairs (coupling index, numerator axis, denominator axis)
    1: ((2, 2, 1), (3, 1, 2)),
    2: ((1, 2, 0), (3, 0, 2)),
    3: ((1, 1, 0), (2, 0, 1)),
}


def sw_KJ(i: int, kappa, k1=0.0, k2=0.0, k3=0.0) -> Observable:
    """Angular-momentum related integral J_i^2 plus two coupling ratios."""
    kap = float(kappa)
    ks = (float(k1), float(k2), float(k3))

    def vg(y):
        ji, gji = _j_vg(i, y)
        val = ji * ji
        g = 2.0 * ji * gji
        for kidx, num_ax, den_ax in _KJ_TERMS[i]:
            kc = ks[kidx - 1]
            if kc == 0.0:
                continue
            a, ga = _coord_vg(num_ax, kap, y)
            b, gb = _coord_vg(den_ax, kap, y)
            _sin_guard(b, "coordinate in coupling ratio")
            q = a / b
            gq = (ga * b - a * gb) / (b * b)
            val += 2.0 * kc * q * q
            g = g + 4.0 * kc * q * gq
        return val, g

    return Observable(
        f"KJ{i}", {"kappa": kap, "k1": ks[0], "k2": ks[1], "k3": ks[2]}, vg
    )


def _osc112_az(kappa) -> Observable:
    kap = float(kappa)
    return Observable("Az", {"kappa": kap}, lambda y: _az_vg(kap, y))


def _osc112_v(kappa, alpha, k1, k2) -> Observable:
    kap, al = float(kappa), float(alpha)

    def vg(y):
        x, gx = _coord_vg(0, kap, y)
        yy, gy = _coord_vg(1, kap, y)
        a, ga = _az_vg(kap, y)
        w = x * x + yy * yy
        gw = 2.0 * x * gx + 2.0 * yy * gy
        den = 1.0 - kap * w
        _sin_guard(den, "planar anisotropy denominator")
        num = w + 4.0 * a * a
        gnum = gw + 8.0 * a * ga
        val = 0.5 * al * al * num / den
        g = 0.5 * al * al * (gnum * den + kap * num * gw) / (den * den)
        if k1 != 0.0:
            _sin_guard(x, "x_k")
            val += k1 / (x * x)
            g = g - 2.0 * k1 * gx / x**3
        if k2 != 0.0:
            _sin_guard(yy, "y_k")
            val += k2 / (yy * yy)
            g = g - 2.0 * k2 * gy / yy**3
        return val, g

    return Observable("V112", {"kappa": kap, "alpha": al, "k1": k1, "k2": k2}, vg)


def _osc112_k3(kappa, alpha) -> Observable:
    kap, al = float(kappa), float(alpha)

    def vg(y):
        p3, gp3 = _p_vg(3, kap, y)
        a, ga = _az_vg(kap, y)
        return p3 * p3 + 4.0 * al * al * a * a, 2.0 * p3 * gp3 + 8.0 * al * al * a * ga

    return Observable("K3", {"kappa": kap, "alpha": al}, vg)


def _osc112_k12(kappa, alpha, k1, k2) -> Observable:
    kap, al = float(kappa), float(alpha)

    def vg(y):
        p1, gp1 = _p_vg(1, kap, y)
        p2, gp2 = _p_vg(2, kap, y)
        j1, gj1 = _j_vg(1, y)
        j2, gj2 = _j_vg(2, y)
        x, gx = _coord_vg(0, kap, y)
        yy, gy = _coord_vg(1, kap, y)
        a, ga = _az_vg(kap, y)
        w = x * x + yy * yy
        gw = 2.0 * x * gx + 2.0 * yy * gy
        den = 1.0 - kap * w
        _sin_guard(den, "planar anisotropy denominator")
        t = w / den
        gt = gw / (den * den)
        coef = 1.0 + 4.0 * kap * a * a
        val = (p1 * p1 + kap * j1 * j1) + (p2 * p2 + kap * j2 * j2) + al * al * coef * t
        g = (
            2.0 * p1 * gp1
            + 2.0 * p2 * gp2
            + 2.0 * kap * (j1 * gj1 + j2 * gj2)
            + al * al * (8.0 * kap * a * t * ga + coef * gt)
        )
        if k2 != 0.0:
            _sin_guard(yy, "y_k")
            val += 2.0 * k2 * (1.0 - kap * x * x) / (yy * yy)
            g = g + 2.0 * k2 * (
                -2.0 * kap * x * gx / (yy * yy) - 2.0 * (1.0 - kap * x * x) * gy / yy**3
            )
        if k1 != 0.0:
            _sin_guard(x, "x_k")
            val += 2.0 * k1 * (1.0 - kap * yy * yy) / (x * x)
            g = g + 2.0 * k1 * (
                -2.0 * kap * yy * gy / (x * x) - 2.0 * (1.0 - kap * yy * yy) * gx / x**3
            )
        return val, g

    return Observable("K12", {"kappa": kap, "alpha": al, "k1": k1, "k2": k2}, vg)


def _osc112_krl(which: int, kappa, alpha, kc) -> Observable:
    """Runge-Lenz style integral of the 1:1:2 oscillator, which in {1, 2}.

    The anisotropy term is written as alpha^2 A G coord with
    G = tan_k(r) sin(theta) trig(phi) / (cos_k(r) den) and
    den = 1 - kappa (tan_k(r) cos(theta))^2, which stays regular on the
    equatorial plane where the naive tan(theta) factoring does not.
    """
    kap, al = float(kappa), float(alpha)

    def vg(y):
        r, th, ph = y[0], y[1], y[2]
        sth, cth = math.sin(th), math.cos(th)
        sph, cph = math.sin(ph), math.cos(ph)
        ck = cos_k(kap, r)
        if abs(ck) < EPS_DOM:
            raise DomainSingularity("cos_k(r) vanishes")
        sk = sin_k(kap, r)
        tk = sk / ck
        u = tk * cth
        den = 1.0 - kap * u * u
        _sin_guard(den, "axial anisotropy denominator")
        a, ga = _az_vg(kap, y)
        z, gz = _coord_vg(2, kap, y)
        if which == 1:
            p, gp = _p_vg(1, kap, y)
            j, gj = _j_vg(2, y)
            c, gc = _coord_vg(0, kap, y)
            trig, dtrig_ph = cph, -sph
            sign = -1.0
        else:
            p, gp = _p_vg(2, kap, y)
            j, gj = _j_vg(1, y)
            c, gc = _coord_vg(1, kap, y)
            trig, dtrig_ph = sph, cph
            sign = 1.0
        q = tk / ck
        dqdr = (ck * ck + 2.0 * kap * sk * sk) / ck**3
        gfac = np.zeros(6)
        gfac[0] = sth * trig * (
            dqdr / den + 2.0 * kap * u * q * cth / (ck * ck * den * den)
        )
        gfac[1] = q * trig * (cth / den - 2.0 * kap * u * tk * sth * sth / (den * den))
        gfac[2] = q * sth * dtrig_ph / den
        fac = q * sth * trig / den
        val = sign * p * j + al * al * a * fac * c
        g = sign * (j * gp + p * gj)
        g = g + al * al * (fac * c * ga + a * c * gfac + a * fac * gc)
        if kc != 0.0:
            _sin_guard(c, "coordinate under coupling")
            val -= 2.0 * kc * ck * z / (c * c)
            coup = ck * (gz / (c * c) - 2.0 * z * gc / c**3)
            coup[0] += -kap * sk * z / (c * c)
            g = g - 2.0 * kc * coup
        return val, g

    return Observable(f"KRL{which}", {"kappa": kap, "alpha": al, "k": kc}, vg)


def osc112_observables(kappa, alpha, k1=0.0, k2=0.0) -> dict:
    """Named observables of the 1:1:2 oscillator with planar couplings."""
    k1, k2 = float(k1), float(k2)
    return {
        "Az": _osc112_az(kappa),
        "V112": _osc112_v(kappa, alpha, k1, k2),
        "K3": _osc112_k3(kappa, alpha),
        "KJ3": sw_KJ(3, kappa, k1=k1, k2=k2),
        "K12": _osc112_k12(kappa, alpha, k1, k2),
        "KRL1": _osc112_krl(1, kappa, alpha, k1),
        "KRL2": _osc112_krl(2, kappa, alpha, k2),
    }


_CYCLE = {1: (2, 3), 2: (3, 1), 3: (1, 2)}


def kepler_RL(i: int, kappa, k) -> Observable:
    """Runge-Lenz component P_j J_l - P_l J_j + k dir_i of the Kepler system."""
    kap, kc = float(kappa), float(k)
    j, l = _CYCLE[i]

    def vg(y):
        pj, gpj = _p_vg(j, kap, y)
        pl, gpl = _p_vg(l, kap, y)
        jj, gjj = _j_vg(j, y)
        jl, gjl = _j_vg(l, y)
        d, gd = _dir_vg(i - 1, y)
        val = pj * jl - pl * jj + kc * d
        g = jl * gpj + pj * gjl - jj * gpl - pl * gjj + kc * gd
        return val, g

    return Observable(f"KRL{i}", {"kappa": kap, "k": kc}, vg)


def _coupling_sum_vg(kap: float, ks, y) -> tuple[float, np.ndarray]:
    val = 0.0
    g = np.zeros(6)
    for ax in range(3):
        kc = ks[ax]
        if kc == 0.0:
            continue
        c, gc = _coord_vg(ax, kap, y)
        _sin_guard(c, "coordinate under coupling")
        val += kc / (c * c)
        g = g - 2.0 * kc * gc / c**3
    return val, g


def k123_R(i: int, kappa, k, k1=0.0, k2=0.0, k3=0.0) -> Observable:
    """Runge-Lenz component corrected by the inverse-square couplings."""
    kap = float(kappa)
    ks = (float(k1), float(k2), float(k3))
    base = kepler_RL(i, kappa, k)

    def vg(y):
        val, g = base._vg(y)
        u, gu = _coupling_sum_vg(kap, ks, y)
        if u != 0.0 or any(ks):
            sk = sin_k(kap, y[0])
            ck = cos_k(kap, y[0])
            cs = ck * sk
            d, gd = _dir_vg(i - 1, y)
            val += 2.0 * cs * d * u
            g = g + 2.0 * (cs * u * gd + cs * d * gu)
            g[0] += 2.0 * (ck * ck - kap * sk * sk) * d * u
        return val, g

    return Observable(
        f"R{i}", {"kappa": kap, "k": float(k), "k1": ks[0], "k2": ks[1], "k3": ks[2]}, vg
    )


def k123_S(i: int, kappa) -> Observable:
    """Scaled radial momentum p_r sin_k(r) divided by the i-th coordinate."""
    kap = float(kappa)

    def vg(y):
        pr = y[3]
        d, gd = _dir_vg(i - 1, y)
        _sin_guard(d, "direction cosine")
        val = pr / d
        g = -pr * gd / (d * d)
        g[3] += 1.0 / d
        return val, g

    return Observable(f"S{i}", {"kappa": kap}, vg)


def k123_N(i: int, kappa, k, k1=0.0, k2=0.0, k3=0.0) -> ComplexObservable:
    """Complex pairing R_i + i sqrt(2 k_i) p_r sin_k(r)/coord_i."""
    ks = (float(k1), float(k2), float(k3))
    ki = ks[i - 1]
    if ki < 0.0:
        raise NegativeCoupling(f"k{i} must be nonnegative for the complex pairing")
    re = k123_R(i, kappa, k, *ks)
    root = math.sqrt(2.0 * ki)
    s_obs = k123_S(i, kappa)

    def im_vg(y):
        v, g = s_obs._vg(y)
        return root * v, root * g

    im = Observable(f"ImN{i}", dict(re.params), im_vg)
    return ComplexObservable(f"N{i}", re, im)


def k123_KR(i: int, kappa, k, k1=0.0, k2=0.0, k3=0.0) -> Observable:
    """Quartic integral R_i^2 + 2 k_i (p_r sin_k(r)/coord_i)^2."""
    ks = (float(k1), float(k2), float(k3))
    ki = ks[i - 1]
    if ki < 0.0:
        raise NegativeCoupling(f"k{i} must be nonnegative for the quartic integral")
    r_obs = k123_R(i, kappa, k, *ks)
    s_obs = k123_S(i, kappa)

    def vg(y):
        rv, rg = r_obs._vg(y)
        sv, sg = s_obs._vg(y)
        return rv * rv + 2.0 * ki * sv * sv, 2.0 * rv * rg + 4.0 * ki * sv * sg

    return Observable(f"KR{i}", dict(r_obs.params), vg)


# ---------------------------------------------------------------------------
# Small assembly helpers for sums and squares of cataloged observables.

def scaled_sum(name: str, terms: list[tuple[float, Observable]]) -> Observable:
    """Linear combination sum_j c_j f_j with the matching gradient."""

    def vg(y):
        val = 0.0
        g = np.zeros(6)
        for c, obs in terms:
            v, gv = obs._vg(y)
            val += c * v
            g = g + c * gv
        return val, g

    return Observable(name, {}, vg)


def square(obs: Observable, name: str | None = None) -> Observable:
    """Pointwise square f^2 with gradient 2 f grad f."""

    def vg(y):
        v, g = obs._vg(y)
        return v * v, 2.0 * v * g

    return Observable(name or f"{obs.name}^2", dict(obs.params), vg)
