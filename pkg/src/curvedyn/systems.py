"""System definitions: potentials, Hamiltonians, equations of motion, catalogs.

Six curvature-parametrized natural Hamiltonian systems on the spherical,
Euclidean, and hyperbolic 3-spaces share the kinetic term
(p_r^2 + p_theta^2/sin_k^2 r + p_phi^2/(sin_k^2 r sin^2 theta))/2 and
differ in the potential:

  free        V = 0
  oscillator  V = alpha^2 tan_k^2(r) / 2
  sw          oscillator plus k_i / coord_i^2 couplings on all three axes
  osc112      2:2:4 frequency-ratio oscillator with two planar couplings
  kepler      V = k / tan_k(r)
  kepler123   kepler plus k_i / coord_i^2 couplings on all three axes

Each system exposes its full set of first integrals as observables,
grouped into involution sets and a designated functional-independence
set, plus closed-form Hamilton equations of motion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import ConfigPoint, PhaseState
from .kappa_core import DomainSingularity, EPS_DOM, cos_k, sin_k
from .observables import (
    ComplexObservable,
    Observable,
    angular_J,
    angular_J_squared,
    complex_M,
    coordinate,
    fradkin_K,
    k123_KR,
    k123_N,
    k123_R,
    k123_S,
    kepler_RL,
    kinetic,
    noether_P,
    osc112_observables,
    scaled_sum,
    square,
    sw_KJ,
)

__all__ = [
    "SYSTEM_IDS",
    "RADIAL_SYSTEMS",
    "SystemSpec",
    "Catalog",
    "make_system",
    "system_summaries",
    "potential_observable",
    "potential_value",
    "hamiltonian",
    "hamilton_rhs",
    "potential_profile",
    "catalog",
    "chart_potential",
    "rho_chart_hamiltonian_value",
    "R_chart_hamiltonian_value",
    "rho_chart_rhs",
]

SYSTEM_IDS = ("free", "oscillator", "sw", "osc112", "kepler", "kepler123")

# Systems whose potential depends on r alone admit the two radial charts.
RADIAL_SYSTEMS = ("free", "oscillator", "kepler")

_DEFAULTS = {
    "free": {},
    "oscillator": {"alpha": 1.0},
    "sw": {"alpha": 1.0, "k1": 0.0, "k2": 0.0, "k3": 0.0},
    "osc112": {"alpha": 1.0, "k1": 0.0, "k2": 0.0},
    "kepler": {"k": -1.0},
    "kepler123": {"k": -1.0, "k1": 0.0, "k2": 0.0, "k3": 0.0},
}

_SUMMARIES = {
    "free": "geodesic motion, V = 0",
    "oscillator": "isotropic oscillator, V = alpha^2 tan_k^2(r)/2",
    "sw": "oscillator with three inverse-square axis couplings",
    "osc112": "1:1:2 anisotropic oscillator with two planar couplings",
    "kepler": "curved Kepler problem, V = k/tan_k(r)",
    "kepler123": "Kepler with three inverse-square axis couplings",
}


@dataclass(frozen=True)
class SystemSpec:
    """A system identifier, curvature, and its parameter values."""

    system_id: str
    kappa: float
    alpha: float = 1.0
    k: float = -1.0
    k1: float = 0.0
    k2: float = 0.0
    k3: float = 0.0

    @property
    def params(self) -> dict:
        return {name: getattr(self, name) for name in _DEFAULTS[self.system_id]}


def make_system(system_id: str, kappa, **params) -> SystemSpec:
    """Build a validated system specification."""
    if system_id not in SYSTEM_IDS:
        raise ValueError(f"unknown system {system_id!r}; choose from {SYSTEM_IDS}")
    allowed = _DEFAULTS[system_id]
    unknown = set(params) - set(allowed)
    if unknown:
        raise ValueError(
            f"system {system_id!r} does not accept parameters {sorted(unknown)}"
        )
    filled = {**allowed, **{k: float(v) for k, v in params.items()}}
    return SystemSpec(system_id=system_id, kappa=float(kappa), **filled)


def system_summaries() -> dict:
    """One-line description of each system, keyed by identifier."""
    return dict(_SUMMARIES)


# ---------------------------------------------------------------------------
# Potentials.

def _v_oscillator(kappa: float, alpha: float) -> Observable:
    def vg(y):
        ck = cos_k(kappa, y[0])
        if abs(ck) < EPS_DOM:
            raise DomainSingularity("oscillator potential singular at cos_k(r) = 0")
        sk = sin_k(kappa, y[0])
        tk = sk / ck
        g = np.zeros(6)
        g[0] = alpha * alpha * sk / ck**3
        return 0.5 * alpha * alpha * tk * tk, g

    return Observable("V", {"kappa": kappa, "alpha": alpha}, vg)


def _v_kepler(kappa: float, k: float) -> Observable:
    def vg(y):
        sk = sin_k(kappa, y[0])
        if abs(sk) < 1e-12:
            raise DomainSingularity("Kepler potential singular at sin_k(r) = 0")
        ck = cos_k(kappa, y[0])
        g = np.zeros(6)
        g[0] = -k / (sk * sk)
        return k * ck / sk, g

    return Observable("V", {"kappa": kappa, "k": k}, vg)


def _v_couplings(kappa: float, ks: tuple) -> Observable:
    obs = [coordinate(ax, kappa) for ax in (1, 2, 3)]

    def vg(y):
        val = 0.0
        g = np.zeros(6)
        for ax in range(3):
            kc = ks[ax]
            if kc == 0.0:
                continue
            c, gc = obs[ax]._vg(y)
            if abs(c) < 1e-12:
                raise DomainSingularity("coupling potential singular on axis plane")
            val += kc / (c * c)
            g = g - 2.0 * kc * gc / c**3
        return val, g

    return Observable("Vc", {"kappa": kappa, "k1": ks[0], "k2": ks[1], "k3": ks[2]}, vg)


def potential_observable(spec: SystemSpec) -> Optional[Observable]:
    """Potential of a system as an observable; None for the free system."""
    kap = spec.kappa
    sid = spec.system_id
    if sid == "free":
        return None
    if sid == "oscillator":
        return _v_oscillator(kap, spec.alpha)
    if sid == "sw":
        vo = _v_oscillator(kap, spec.alpha)
        vc = _v_couplings(kap, (spec.k1, spec.k2, spec.k3))
        return scaled_sum("V", [(1.0, vo), (1.0, vc)])
    if sid == "osc112":
        return osc112_observables(kap, spec.alpha, spec.k1, spec.k2)["V112"]
    if sid == "kepler":
        return _v_kepler(kap, spec.k)
    if sid == "kepler123":
        vk = _v_kepler(kap, spec.k)
        vc = _v_couplings(kap, (spec.k1, spec.k2, spec.k3))
        return scaled_sum("V", [(1.0, vk), (1.0, vc)])
    raise ValueError(f"unknown system {sid!r}")


def potential_value(spec: SystemSpec, q: ConfigPoint) -> float:
    """Potential energy at a configuration point."""
    v = potential_observable(spec)
    if v is None:
        return 0.0
    return v.value(np.array([q.r, q.theta, q.phi, 0.0, 0.0, 0.0]))


def hamiltonian(spec: SystemSpec) -> Observable:
    """Hamiltonian observable H = T + V of a system."""
    t = kinetic(spec.kappa)
    v = potential_observable(spec)
    if v is None:
        return Observable("H", dict(t.params), t._vg)
    return scaled_sum("H", [(1.0, t), (1.0, v)])


# ---------------------------------------------------------------------------
# Equations of motion.

def _coupling_force(ks, sk, ck, sth, cth, sph, cph):
    """Configuration-space partials of sum k_i / coord_i^2 in plain floats."""
    vr = vth = vph = 0.0
    k1, k2, k3 = ks
    if k1 != 0.0:
        x = sk * sth * cph
        if abs(x) < 1e-12:
            raise DomainSingularity("x coordinate vanishes under coupling")
        c = -2.0 * k1 / (x * x * x)
        vr += c * ck * sth * cph
        vth += c * sk * cth * cph
        vph += c * (-sk * sth * sph)
    if k2 != 0.0:
        yy = sk * sth * sph
        if abs(yy) < 1e-12:
            raise DomainSingularity("y coordinate vanishes under coupling")
        c = -2.0 * k2 / (yy * yy * yy)
        vr += c * ck * sth * sph
        vth += c * sk * cth * sph
        vph += c * sk * sth * cph
    if k3 != 0.0:
        z = sk * cth
        if abs(z) < 1e-12:
            raise DomainSingularity("z coordinate vanishes under coupling")
        c = -2.0 * k3 / (z * z * z)
        vr += c * ck * cth
        vth += c * (-sk * sth)
    return vr, vth, vph


def _potential_force(spec: SystemSpec):
    """Per-system closure giving (V_r, V_theta, V_phi) in plain floats."""
    kap = spec.kappa
    sid = spec.system_id
    if sid == "free":
        return None
    if sid == "oscillator":
        al2 = spec.alpha**2

        def force(sk, ck, sth, cth, sph, cph):
            return al2 * sk / (ck * ck * ck), 0.0, 0.0

        return force
    if sid == "kepler":
        kc = spec.k

        def force(sk, ck, sth, cth, sph, cph):
            return -kc / (sk * sk), 0.0, 0.0

        return force
    if sid == "sw":
        al2 = spec.alpha**2
        ks = (spec.k1, spec.k2, spec.k3)

        def force(sk, ck, sth, cth, sph, cph):
            vr, vth, vph = _coupling_force(ks, sk, ck, sth, cth, sph, cph)
            return vr + al2 * sk / (ck * ck * ck), vth, vph

        return force
    if sid == "kepler123":
        kc = spec.k
        ks = (spec.k1, spec.k2, spec.k3)

        def force(sk, ck, sth, cth, sph, cph):
            vr, vth, vph = _coupling_force(ks, sk, ck, sth, cth, sph, cph)
            return vr - kc / (sk * sk), vth, vph

        return force
    # 1:1:2 oscillator: planar part uses w = sin_k^2 sin^2 theta, axial
    # part the factor A = u/(1 - kappa u^2) with u = tan_k cos theta
    al2 = spec.alpha**2
    ks = (spec.k1, spec.k2, 0.0)

    def force(sk, ck, sth, cth, sph, cph):
        if abs(ck) < EPS_DOM:
            raise DomainSingularity("cos_k(r) vanishes along trajectory")
        w = sk * sk * sth * sth
        den = 1.0 - kap * w
        if abs(den) < 1e-12:
            raise DomainSingularity("planar anisotropy denominator vanishes")
        tk = sk / ck
        u = tk * cth
        uden = 1.0 - kap * u * u
        if abs(uden) < 1e-12:
            raise DomainSingularity("axial anisotropy denominator vanishes")
        a = u / uden
        dadu = (1.0 + kap * u * u) / (uden * uden)
        w_r = 2.0 * sk * ck * sth * sth
        w_th = 2.0 * sk * sk * sth * cth
        u_r = cth / (ck * ck)
        u_th = -tk * sth
        n = w + 4.0 * a * a
        n_r = w_r + 8.0 * a * dadu * u_r
        n_th = w_th + 8.0 * a * dadu * u_th
        d2 = den * den
        vr = 0.5 * al2 * (n_r * den + kap * n * w_r) / d2
        vth = 0.5 * al2 * (n_th * den + kap * n * w_th) / d2
        cr, cth_f, cph_f = _coupling_force(ks, sk, ck, sth, cth, sph, cph)
        return vr + cr, vth + cth_f, cph_f

    return force


def hamilton_rhs(spec: SystemSpec) -> Callable[[float, np.ndarray], np.ndarray]:
    """Closed-form Hamilton equations dy/dt = f(t, y) for a system."""
    kap = spec.kappa
    force = _potential_force(spec)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        r, th = y[0], y[1]
        pr, pth, pph = y[3], y[4], y[5]
        sk = sin_k(kap, r)
        if abs(sk) < 1e-12:
            raise DomainSingularity("sin_k(r) vanishes along trajectory")
        sth = math.sin(th)
        if abs(sth) < 1e-12:
            raise DomainSingularity("sin(theta) vanishes along trajectory")
        ck = cos_k(kap, r)
        cth = math.cos(th)
        sk2 = sk * sk
        sth2 = sth * sth
        ang = pth * pth + pph * pph / sth2
        out = np.empty(6)
        out[0] = pr
        out[1] = pth / sk2
        out[2] = pph / (sk2 * sth2)
        out[3] = ck * ang / (sk2 * sk)
        out[4] = cth * pph * pph / (sk2 * sth2 * sth)
        out[5] = 0.0
        if force is not None:
            vr, vth, vph = force(sk, ck, sth, cth, math.sin(y[2]), math.cos(y[2]))
            out[3] -= vr
            out[4] -= vth
            out[5] -= vph
        return out

    return rhs


def potential_profile(
    spec: SystemSpec,
    r_values,
    theta: float = math.pi / 2.0,
    phi: float = math.pi / 4.0,
) -> np.ndarray:
    """Potential sampled along a fixed ray; singular radii yield NaN rows."""
    v = potential_observable(spec)
    rs = np.asarray(r_values, dtype=float)
    out = np.empty((rs.size, 2))
    out[:, 0] = rs
    for idx, r in enumerate(rs):
        if v is None:
            out[idx, 1] = 0.0
            continue
        try:
            out[idx, 1] = v.value(np.array([r, theta, phi, 0.0, 0.0, 0.0]))
        except DomainSingularity:
            out[idx, 1] = math.nan
    return out


# ---------------------------------------------------------------------------
# Integral catalogs.

@dataclass(frozen=True)
class Catalog:
    """First integrals and companion observables of one system."""

    integrals: dict
    aux: dict
    complexes: dict
    involution_sets: dict
    independence_sets: dict

    @property
    def observables(self) -> dict:
        merged = dict(self.integrals)
        merged.update(self.aux)
        return merged

    def get(self, name: str) -> Observable:
        try:
            return self.observables[name]
        except KeyError:
            raise KeyError(
                f"no observable named {name!r}; available: "
                f"{sorted(self.observables)}"
            ) from None


def _axis_blocks(kap, diag, extra):
    """Complementary blocks W_i = diag_j + diag_l + kappa (extra_j + extra_l)."""
    blocks = {}
    cyc = {1: (2, 3), 2: (3, 1), 3: (1, 2)}
    for i in (1, 2, 3):
        j, l = cyc[i]
        blocks[f"W{i}"] = scaled_sum(
            f"W{i}",
            [(1.0, diag[j]), (1.0, diag[l]), (kap, extra[j]), (kap, extra[l])],
        )
    return blocks


def catalog(spec: SystemSpec) -> Catalog:
    """Build the named integral catalog of a system."""
    kap = spec.kappa
    sid = spec.system_id
    h = hamiltonian(spec)
    jsq = angular_J_squared()
    if sid == "free":
        integrals = {f"P{i}": noether_P(i, kap) for i in (1, 2, 3)}
        integrals.update({f"J{i}": angular_J(i) for i in (1, 2, 3)})
        aux = {"H": h, "Jsq": jsq}
        invol = {"H_J2_J3": ("H", "Jsq", "J3")}
        indep = {"primary": ("P1", "P2", "P3", "J1", "J2")}
        return Catalog(integrals, aux, {}, invol, indep)
    if sid == "oscillator":
        al = spec.alpha
        integrals = {f"J{i}": angular_J(i) for i in (1, 2, 3)}
        for i, j in ((1, 1), (2, 2), (3, 3), (1, 2), (2, 3), (3, 1)):
            integrals[f"K{i}{j}"] = fradkin_K(i, j, kap, al)
        diag = {i: integrals[f"K{i}{i}"] for i in (1, 2, 3)}
        jsqs = {i: square(integrals[f"J{i}"], f"J{i}sq") for i in (1, 2, 3)}
        aux = {"H": h, "Jsq": jsq}
        aux.update(_axis_blocks(kap, diag, jsqs))
        complexes = {f"M{j}": complex_M(j, kap, al) for j in (1, 2, 3)}
        invol = {
            "H_J2_J3": ("H", "Jsq", "J3"),
            "axis1": ("K11", "J1", "W1"),
            "axis2": ("K22", "J2", "W2"),
            "axis3": ("K33", "J3", "W3"),
        }
        # Any 5-set containing a diagonal pair K_ii, K_jj together with
        # K_ij and J_l is dependent through the published minor identity
        # K_ii K_jj - K_ij^2 = alpha^2 J_l^2, so the designated set mixes
        # the three angular momenta with two diagonal entries instead.
        indep = {"primary": ("J1", "J2", "J3", "K11", "K22")}
        return Catalog(integrals, aux, complexes, invol, indep)
    if sid == "sw":
        al = spec.alpha
        ks = (spec.k1, spec.k2, spec.k3)
        integrals = {
            f"K{i}{i}": fradkin_K(i, i, kap, al, *ks) for i in (1, 2, 3)
        }
        integrals.update({f"KJ{i}": sw_KJ(i, kap, *ks) for i in (1, 2, 3)})
        diag = {i: integrals[f"K{i}{i}"] for i in (1, 2, 3)}
        kjs = {i: integrals[f"KJ{i}"] for i in (1, 2, 3)}
        aux = {"H": h}
        aux.update(_axis_blocks(kap, diag, kjs))
        aux["KJ23"] = scaled_sum("KJ23", [(1.0, kjs[2]), (1.0, kjs[3])])
        aux["KJ31"] = scaled_sum("KJ31", [(1.0, kjs[3]), (1.0, kjs[1])])
        aux["KJ12"] = scaled_sum("KJ12", [(1.0, kjs[1]), (1.0, kjs[2])])
        invol = {
            "H_KJ1": ("H", "KJ1", "KJ23"),
            "H_KJ2": ("H", "KJ2", "KJ31"),
            "H_KJ3": ("H", "KJ3", "KJ12"),
            "axis1": ("K11", "KJ1", "W1"),
            "axis2": ("K22", "KJ2", "W2"),
            "axis3": ("K33", "KJ3", "W3"),
        }
        indep = {"primary": ("KJ1", "KJ2", "KJ3", "K11", "K22")}
        return Catalog(integrals, aux, {}, invol, indep)
    if sid == "osc112":
        fam = osc112_observables(kap, spec.alpha, spec.k1, spec.k2)
        integrals = {n: fam[n] for n in ("K3", "KJ3", "K12", "KRL1", "KRL2")}
        aux = {"H": h, "Az": fam["Az"], "V112": fam["V112"]}
        invol = {"K3_KJ3_K12": ("K3", "KJ3", "K12")}
        indep = {"primary": ("K3", "KJ3", "K12", "KRL1", "KRL2")}
        return Catalog(integrals, aux, {}, invol, indep)
    if sid == "kepler":
        integrals = {f"J{i}": angular_J(i) for i in (1, 2, 3)}
        integrals.update(
            {f"KRL{i}": kepler_RL(i, kap, spec.k) for i in (1, 2, 3)}
        )
        aux = {"H": h, "Jsq": jsq}
        invol = {"H_J2_J3": ("H", "Jsq", "J3")}
        indep = {"primary": ("J1", "J2", "J3", "KRL1", "KRL2")}
        return Catalog(integrals, aux, {}, invol, indep)
    if sid == "kepler123":
        ks = (spec.k1, spec.k2, spec.k3)
        integrals = {f"KJ{i}": sw_KJ(i, kap, *ks) for i in (1, 2, 3)}
        complexes = {}
        # R_i and S_i are conserved only in pairs through the quartic
        # combination KR_i = R_i^2 + 2 k_i S_i^2, so they live in aux.
        aux = {"H": h}
        for i in (1, 2, 3):
            aux[f"R{i}"] = k123_R(i, kap, spec.k, *ks)
            aux[f"S{i}"] = k123_S(i, kap)
            if ks[i - 1] >= 0.0:
                integrals[f"KR{i}"] = k123_KR(i, kap, spec.k, *ks)
                complexes[f"N{i}"] = k123_N(i, kap, spec.k, *ks)
        kjs = {i: integrals[f"KJ{i}"] for i in (1, 2, 3)}
        aux["KJ23"] = scaled_sum("KJ23", [(1.0, kjs[2]), (1.0, kjs[3])])
        aux["KJ31"] = scaled_sum("KJ31", [(1.0, kjs[3]), (1.0, kjs[1])])
        aux["KJ12"] = scaled_sum("KJ12", [(1.0, kjs[1]), (1.0, kjs[2])])
        invol = {
            "H_KJ1": ("H", "KJ1", "KJ23"),
            "H_KJ2": ("H", "KJ2", "KJ31"),
            "H_KJ3": ("H", "KJ3", "KJ12"),
        }
        primary = tuple(
            ["KJ1", "KJ2", "KJ3"]
            + [n for n in ("KR1", "KR2", "KR3") if n in integrals][:2]
        )
        if len(primary) < 5:
            primary = primary + ("H",)[: 5 - len(primary)]
        return Catalog(integrals, aux, complexes, invol, {"primary": primary})
    raise ValueError(f"unknown system {sid!r}")


# ---------------------------------------------------------------------------
# Radial charts.  rho = sin_k(r) and R = tan_k(r) give two alternative
# coordinates for the systems whose potential depends on r only.

def _require_radial(spec: SystemSpec) -> None:
    if spec.system_id not in RADIAL_SYSTEMS:
        raise ValueError(
            f"chart forms require a radial potential; {spec.system_id!r} has "
            "angle-dependent terms"
        )


def chart_potential(spec: SystemSpec, chart: str) -> Callable[[float], float]:
    """Potential as a function of the chart radius rho or R."""
    _require_radial(spec)
    kap = spec.kappa
    sid = spec.system_id
    if chart == "rho":
        if sid == "free":
            return lambda rho: 0.0
        if sid == "oscillator":
            al2 = spec.alpha**2
            return lambda rho: 0.5 * al2 * rho * rho / (1.0 - kap * rho * rho)
        kc = spec.k
        return lambda rho: kc * math.sqrt(1.0 - kap * rho * rho) / rho
    if chart == "R":
        if sid == "free":
            return lambda R: 0.0
        if sid == "oscillator":
            al2 = spec.alpha**2
            return lambda R: 0.5 * al2 * R * R
        kc = spec.k
        return lambda R: kc / R
    raise ValueError(f"chart must be 'rho' or 'R', got {chart!r}")


def _chart_potential_derivative(spec: SystemSpec) -> Callable[[float], float]:
    """d V / d rho for the rho chart."""
    kap = spec.kappa
    sid = spec.system_id
    if sid == "free":
        return lambda rho: 0.0
    if sid == "oscillator":
        al2 = spec.alpha**2
        return lambda rho: al2 * rho / (1.0 - kap * rho * rho) ** 2
    kc = spec.k
    return lambda rho: -kc / (rho * rho * math.sqrt(1.0 - kap * rho * rho))


def rho_chart_hamiltonian_value(spec: SystemSpec, s: PhaseState) -> float:
    """Hamiltonian evaluated on a rho-chart state."""
    _require_radial(spec)
    kap = spec.kappa
    rho = s.q.r
    sth = math.sin(s.q.theta)
    if abs(rho) < 1e-12 or abs(sth) < 1e-12:
        raise DomainSingularity("rho-chart state on a coordinate singularity")
    ang = s.p_theta**2 + (s.p_phi / sth) ** 2
    kin = 0.5 * ((1.0 - kap * rho * rho) * s.p_r**2 + ang / (rho * rho))
    return kin + chart_potential(spec, "rho")(rho)


def R_chart_hamiltonian_value(spec: SystemSpec, s: PhaseState) -> float:
    """Hamiltonian evaluated on an R-chart state."""
    _require_radial(spec)
    kap = spec.kappa
    rr = s.q.r
    sth = math.sin(s.q.theta)
    if abs(rr) < 1e-12 or abs(sth) < 1e-12:
        raise DomainSingularity("R-chart state on a coordinate singularity")
    fac = 1.0 + kap * rr * rr
    ang = s.p_theta**2 + (s.p_phi / sth) ** 2
    kin = 0.5 * (fac * fac * s.p_r**2 + fac * ang / (rr * rr))
    return kin + chart_potential(spec, "R")(rr)


def rho_chart_rhs(spec: SystemSpec) -> Callable[[float, np.ndarray], np.ndarray]:
    """Hamilton equations in the rho chart for radial systems."""
    _require_radial(spec)
    kap = spec.kappa
    dv = _chart_potential_derivative(spec)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        rho, th = y[0], y[1]
        prho, pth, pph = y[3], y[4], y[5]
        if abs(rho) < 1e-12:
            raise DomainSingularity("rho vanishes along trajectory")
        sth = math.sin(th)
        if abs(sth) < 1e-12:
            raise DomainSingularity("sin(theta) vanishes along trajectory")
        rho2 = rho * rho
        if kap > 0.0 and 1.0 - kap * rho2 < 1e-12:
            raise DomainSingularity("rho chart boundary reached")
        sth2 = sth * sth
        ang = pth * pth + pph * pph / sth2
        out = np.empty(6)
        out[0] = (1.0 - kap * rho2) * prho
        out[1] = pth / rho2
        out[2] = pph / (rho2 * sth2)
        out[3] = kap * rho * prho * prho + ang / (rho2 * rho) - dv(rho)
        out[4] = math.cos(th) * pph * pph / (rho2 * sth2 * sth)
        out[5] = 0.0
        return out

    return rhs
