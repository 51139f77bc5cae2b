"""Poisson brackets, integrators, audits, and closed-orbit detection.

The canonical bracket pairs (r, p_r), (theta, p_theta), (phi, p_phi).
Brackets of cataloged observables contract their analytic gradients, so
bracket identities can be audited to near machine precision without any
finite differencing.  Three integrators cover the trade-offs: a fixed
step classical Runge-Kutta, an embedded Dormand-Prince 5(4) pair with
proportional-integral step control, and an implicit midpoint rule whose
fixed-point iteration preserves quadratic invariants to iteration
tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .geometry import PhaseState
from .kappa_core import DomainSingularity, cos_k, sin_k
from .observables import Observable, analytic_gradient
from .systems import SystemSpec, catalog, hamilton_rhs, hamiltonian

__all__ = [
    "NonConvergence",
    "Trajectory",
    "poisson_bracket",
    "poisson_bracket_fd",
    "integrate",
    "sample_state",
    "conservation_report",
    "independence_rank",
    "fradkin_audit",
    "BracketResidual",
    "bracket_table_audit",
    "ClosedOrbitResult",
    "closed_orbit_check",
]

METHODS = ("rk4_fixed", "rk45_adaptive", "implicit_midpoint")


class NonConvergence(RuntimeError):
    """Implicit solver failed to reach its fixed-point tolerance."""


# ---------------------------------------------------------------------------
# Poisson brackets.

def _as_array(s) -> np.ndarray:
    if isinstance(s, PhaseState):
        return s.as_array()
    return np.asarray(s, dtype=float)


def poisson_bracket(f: Observable, g: Observable, s) -> float:
    """Canonical bracket {f, g} contracted from analytic gradients."""
    gf = analytic_gradient(f, s)
    gg = analytic_gradient(g, s)
    return float(gf[:3] @ gg[3:] - gf[3:] @ gg[:3])


def poisson_bracket_fd(f, g, s, h: float = 1e-6) -> float:
    """Central finite-difference bracket of two state functions."""
    y = _as_array(s)

    def grad(fn):
        out = np.empty(6)
        for i in range(6):
            yp = y.copy()
            ym = y.copy()
            yp[i] += h
            ym[i] -= h
            out[i] = (_call(fn, yp) - _call(fn, ym)) / (2.0 * h)
        return out

    gf = grad(f)
    gg = grad(g)
    return float(gf[:3] @ gg[3:] - gf[3:] @ gg[:3])


def _call(fn, y: np.ndarray) -> float:
    if isinstance(fn, Observable):
        return fn.value(y)
    return float(fn(y))


# ---------------------------------------------------------------------------
# Integrators.

@dataclass
class Trajectory:
    """Time grid, states, and run diagnostics of one integration."""

    times: np.ndarray
    states: np.ndarray
    diagnostics: dict = field(default_factory=dict)
    truncated: bool = False

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def thin(self, max_points: int) -> "Trajectory":
        """Evenly subsampled copy keeping the first and last states."""
        n = len(self.times)
        if max_points < 2:
            raise ValueError("max_points must be at least 2")
        if n <= max_points:
            return self
        idx = np.unique(np.linspace(0, n - 1, max_points).round().astype(int))
        return Trajectory(self.times[idx], self.states[idx], self.diagnostics, self.truncated)


_DP_C = np.array([0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0])
_DP_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0),
)
_DP_B5 = np.array(
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0]
)
_DP_B4 = np.array(
    [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ]
)


def _rk4_step(rhs, t, y, dt):
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _fixed_grid(t0: float, t1: float, dt: float):
    n = max(1, int(math.ceil((t1 - t0) / dt - 1e-12)))
    return n


def _integrate_fixed(rhs, y0, t0, t1, dt, stepper, diag):
    n = _fixed_grid(t0, t1, dt)
    times = [t0]
    states = [y0.copy()]
    y = y0.copy()
    t = t0
    truncated = False
    for i in range(n):
        step = min(dt, t1 - t)
        try:
            y = stepper(rhs, t, y, step)
        except DomainSingularity as exc:
            diag["reason"] = f"domain singularity: {exc}"
            truncated = True
            break
        t = t + step
        times.append(t)
        states.append(y.copy())
        diag["n_steps"] = diag.get("n_steps", 0) + 1
    return Trajectory(np.array(times), np.array(states), diag, truncated)


def _error_norm(err: np.ndarray, y0: np.ndarray, y1: np.ndarray, tol: float) -> float:
    scale = tol + tol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _integrate_dp54(rhs, y0, t0, t1, dt0, tol, dt_min, max_steps, diag):
    t = t0
    y = y0.copy()
    times = [t0]
    states = [y0.copy()]
    dt = dt0 if dt0 is not None else min(0.01 * (t1 - t0), 0.1)
    err_prev = 1.0
    k1 = None
    n_steps = n_rejected = n_evals = 0
    truncated = False
    while t < t1 - 1e-14 * max(1.0, abs(t1)):
        if n_steps + n_rejected >= max_steps:
            diag["reason"] = "max_steps exceeded"
            truncated = True
            break
        dt = min(dt, t1 - t)
        try:
            if k1 is None:
                k1 = rhs(t, y)
                n_evals += 1
            ks = [k1]
            for stage in range(1, 7):
                ya = y + dt * sum(
                    a * k for a, k in zip(_DP_A[stage], ks)
                )
                ks.append(rhs(t + _DP_C[stage] * dt, ya))
                n_evals += 1
        except DomainSingularity as exc:
            k1 = None
            if dt <= dt_min:
                diag["reason"] = f"domain singularity: {exc}"
                truncated = True
                break
            dt = max(0.25 * dt, dt_min)
            n_rejected += 1
            continue
        karr = np.array(ks)
        y5 = y + dt * (_DP_B5 @ karr)
        y4 = y + dt * (_DP_B4 @ karr)
        err = _error_norm(y5 - y4, y, y5, tol)
        if err <= 1.0:
            t = t + dt
            y = y5
            times.append(t)
            states.append(y.copy())
            k1 = ks[6]  # first-same-as-last
            n_steps += 1
            fac = 0.9 * (err + 1e-300) ** -0.14 * err_prev**0.08
            dt = dt * min(5.0, max(0.2, fac))
            err_prev = max(err, 1e-4)
        else:
            k1 = None
            n_rejected += 1
            if dt <= dt_min:
                diag["reason"] = "step size underflow"
                truncated = True
                break
            fac = 0.9 * err**-0.2
            dt = max(dt * max(0.2, min(1.0, fac)), dt_min)
    diag.update(n_steps=n_steps, n_rejected=n_rejected, n_rhs_evals=n_evals)
    return Trajectory(np.array(times), np.array(states), diag, truncated)


def _implicit_midpoint_step(rhs, t, y, dt, fp_tol, max_iter=100):
    ynew = _rk4_step(rhs, t, y, dt)  # warm start
    tm = t + 0.5 * dt
    scale = max(1.0, float(np.max(np.abs(y))))
    for _ in range(max_iter):
        ynext = y + dt * rhs(tm, 0.5 * (y + ynew))
        delta = float(np.max(np.abs(ynext - ynew)))
        ynew = ynext
        if delta < fp_tol * scale:
            return ynew
    raise NonConvergence(
        f"implicit midpoint fixed point did not reach {fp_tol} at t = {t}"
    )


def integrate(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0,
    t_span,
    method: str = "rk45_adaptive",
    dt: Optional[float] = None,
    tol: float = 1e-10,
    dt_min: float = 1e-12,
    fp_tol: float = 1e-13,
    max_steps: int = 2_000_000,
) -> Trajectory:
    """Integrate dy/dt = rhs(t, y) over t_span, storing every step.

    A domain singularity encountered mid-run truncates the trajectory at
    the last good state (the adaptive method first retries with smaller
    steps down to dt_min) and sets the truncated flag with a reason in
    the diagnostics.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError("t_span must satisfy t1 > t0")
    y0 = _as_array(y0).copy()
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    diag = {"method": method, "tol": tol, "dt": dt}
    if method == "rk45_adaptive":
        return _integrate_dp54(rhs, y0, t0, t1, dt, tol, dt_min, max_steps, diag)
    if dt is None:
        raise ValueError(f"method {method!r} requires an explicit dt")
    if method == "rk4_fixed":
        return _integrate_fixed(rhs, y0, t0, t1, dt, _rk4_step, diag)
    stepper = lambda f, t, y, h: _implicit_midpoint_step(f, t, y, h, fp_tol)
    return _integrate_fixed(rhs, y0, t0, t1, dt, stepper, diag)


# ---------------------------------------------------------------------------
# State sampling.

def sample_state(
    spec: SystemSpec,
    rng: np.random.Generator,
    min_angular: float = 0.0,
    margin: float = 0.05,
) -> np.ndarray:
    """Draw a random phase-space state away from coordinate singularities.

    Rejection rules keep sin(theta), sin_k(r), and cos_k(r) away from
    zero, keep the Cartesian coordinates away from the axis planes for
    systems with couplings on them, and optionally enforce a floor on
    the angular momentum so that sampled trajectories stay clear of the
    polar axis.
    """
    kap = spec.kappa
    if kap > 0.0:
        lo, hi = 0.15, math.pi / math.sqrt(kap) - 0.15
    else:
        lo, hi = 0.15, 2.5
    needs_axis = {
        "free": (False, False, False),
        "oscillator": (False, False, False),
        "kepler": (False, False, False),
        "sw": (spec.k1 != 0.0, spec.k2 != 0.0, spec.k3 != 0.0),
        "kepler123": (spec.k1 != 0.0, spec.k2 != 0.0, spec.k3 != 0.0),
        "osc112": (spec.k1 != 0.0, spec.k2 != 0.0, True),
    }[spec.system_id]
    for _ in range(100000):
        r = rng.uniform(lo, hi)
        th = rng.uniform(0.0, math.pi)
        ph = rng.uniform(0.0, 2.0 * math.pi)
        sth = math.sin(th)
        sk = sin_k(kap, r)
        ck = cos_k(kap, r)
        if sth < margin or sk < margin or abs(ck) < margin:
            continue
        dirs = (sth * math.cos(ph), sth * math.sin(ph), math.cos(th))
        if any(need and abs(sk * d) < margin for need, d in zip(needs_axis, dirs)):
            continue
        if spec.system_id == "osc112":
            u = (sk / ck) * math.cos(th)
            if abs(1.0 - kap * u * u) < margin:
                continue
        pr, pth, pph = rng.uniform(-1.0, 1.0, 3)
        if min_angular > 0.0:
            if abs(pph) < min_angular or pth * pth + pph * pph < min_angular:
                continue
        return np.array([r, th, ph, pr, pth, pph])
    raise RuntimeError("state sampling failed to satisfy the rejection rules")


# ---------------------------------------------------------------------------
# Audits.

def conservation_report(observables: dict, traj: Trajectory) -> dict:
    """Drift of each named observable along a trajectory.

    Relative drift is the maximum deviation from the initial value
    divided by max(1, |initial value|).
    """
    report = {}
    for name, obs in observables.items():
        values = np.array([obs.value(y) for y in traj.states])
        v0 = values[0]
        drift = float(np.max(np.abs(values - v0)))
        report[name] = {
            "initial": float(v0),
            "max_drift": drift,
            "rel_drift": drift / max(1.0, abs(v0)),
        }
    return report


def independence_rank(
    observables: Sequence[Observable], s, threshold: float = 1e-6
) -> int:
    """Rank of the stacked gradient matrix at a state via SVD.

    Each gradient row is scaled to unit norm first, so the relative
    singular-value threshold measures directions rather than the very
    different magnitudes that quadratic and quartic integrals can have.
    Functional independence is invariant under this row scaling, and
    genuine dependencies still manifest many orders below the
    threshold.
    """
    g = np.array([analytic_gradient(o, s) for o in observables])
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        g = np.where(norms > 0.0, g / np.maximum(norms, 1e-300), g)
    else:
        g = g / norms
    sv = np.linalg.svd(g, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > threshold * sv[0]))


def fradkin_audit(kappa, alpha, s) -> dict:
    """Normalized residuals of the oscillator quadratic-tensor identities.

    Covers the trace identity, the vanishing determinant, the kernel
    relation K J = 0, the coordinate quadratic forms, the 2x2 minors,
    and the three full contractions with coordinates and momenta.
    """
    from .observables import angular_J, fradkin_matrix, kappa_cartesian, noether_P
    from .geometry import PhaseState

    kap = float(kappa)
    y = _as_array(s)
    ps = PhaseState.from_array(y)
    m = fradkin_matrix(kap, alpha, y).entries
    j = np.array([angular_J(i).value(y) for i in (1, 2, 3)])
    p = np.array([noether_P(i, kap).value(y) for i in (1, 2, 3)])
    x = np.array(kappa_cartesian(kap, ps.q))
    ck = cos_k(kap, y[0])
    sk = sin_k(kap, y[0])
    tk = sk / ck
    jsq = float(j @ j)
    psq = float(p @ p)
    # the momenta satisfy sum P^2 + kappa sum J^2 = 2 T, so H = T + V reads
    h = 0.5 * (psq + kap * jsq) + 0.5 * alpha**2 * tk * tk
    scale_m = max(1.0, float(np.linalg.norm(m)))
    scale_j = max(1.0, float(np.linalg.norm(j)))
    res = {}
    res["trace"] = abs(np.trace(m) + kap * jsq - 2.0 * h) / max(1.0, abs(2.0 * h))
    res["det"] = abs(np.linalg.det(m)) / scale_m**3
    res["kernel"] = float(np.linalg.norm(m @ j)) / (scale_m * scale_j)
    quad_pairs = (((0, 1), 2), ((1, 2), 0), ((2, 0), 1))
    for (a, b), c in quad_pairs:
        lhs = (
            x[a] * x[a] * m[b, b]
            - 2.0 * x[a] * x[b] * m[a, b]
            + x[b] * x[b] * m[a, a]
        )
        rhs = ck * ck * j[c] * j[c]
        res[f"quad{c + 1}"] = abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))
        lhs = m[a, a] * m[b, b] - m[a, b] ** 2
        rhs = alpha**2 * j[c] * j[c]
        res[f"minor{c + 1}"] = abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))
    lhs = float(x @ m @ x)
    rhs = 2.0 * float(x @ x) * h - jsq
    res["xx"] = abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))
    lhs = float(x @ m @ p)
    rhs = (y[3] * sk) * (2.0 * h - kap * jsq)
    res["xp"] = abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))
    lhs = float(p @ m @ p)
    rhs = psq * psq + alpha**2 * tk * tk * y[3] * y[3]
    res["pp"] = abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))
    return res


@dataclass(frozen=True)
class BracketResidual:
    """Maximum scale-normalized residual of one identity over the states.

    Each residual is divided by max(1, gradient-norm product, |expected
    value|), so tame identities are measured absolutely while entries
    whose terms reach 1e4-1e6 near the sampling margins are measured
    against their roundoff floor instead of the float noise itself.
    """

    name: str
    residual: float


def _max_residual(states, fn) -> float:
    return max(abs(fn(y)) for y in states)


def _pb_rel(f: Observable, g: Observable, y, expect: float = 0.0) -> float:
    """Bracket minus its expected value, relative to the gradient scale."""
    gf = analytic_gradient(f, y)
    gg = analytic_gradient(g, y)
    raw = float(gf[:3] @ gg[3:] - gf[3:] @ gg[:3]) - expect
    scale = max(1.0, float(np.linalg.norm(gf) * np.linalg.norm(gg)), abs(expect))
    return raw / scale


def bracket_table_audit(
    spec: SystemSpec,
    states: Iterable[np.ndarray],
    rng: Optional[np.random.Generator] = None,
) -> list:
    """Audit every displayed bracket identity of a system.

    Returns one residual per identity, maximized over the given states
    and normalized as described on BracketResidual.  Identities
    involving free coefficients draw a fresh random vector per state
    from rng (defaulting to a fixed seed).
    """
    if rng is None:
        rng = np.random.default_rng(0)
    states = [np.asarray(y, dtype=float) for y in states]
    cat = catalog(spec)
    obs = cat.observables
    h = obs["H"]
    kap = spec.kappa
    out = []

    def add(name, fn):
        out.append(BracketResidual(name, _max_residual(states, fn)))

    def pb(f, g, y):
        return poisson_bracket(f, g, y)

    for name, group in cat.involution_sets.items():
        members = [obs[n] for n in group]
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                f, g = members[i], members[j]
                add(
                    f"invol:{name}:{{{group[i]},{group[j]}}}",
                    lambda y, f=f, g=g: _pb_rel(f, g, y),
                )
    for name, o in cat.integrals.items():
        add(f"conserve:{{{name},H}}", lambda y, o=o: _pb_rel(o, h, y))

    sid = spec.system_id
    if sid == "free":
        from .observables import coordinate, scaled_sum

        p = {i: obs[f"P{i}"] for i in (1, 2, 3)}
        j = {i: obs[f"J{i}"] for i in (1, 2, 3)}

        def radial_residual(y):
            coords = [coordinate(ax, kap).value(y) for ax in (1, 2, 3)]
            total = sum(c * p[m].value(y) for c, m in zip(coords, (1, 2, 3)))
            expect = y[3] * sin_k(kap, y[0])
            return (total - expect) / max(1.0, abs(expect))

        add("alg:x.P-p_r*sin_k", radial_residual)
        for a, b, c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
            add(
                f"{{P{a},P{b}}}-kappa*J{c}",
                lambda y, a=a, b=b, c=c: _pb_rel(p[a], p[b], y, kap * j[c].value(y)),
            )
            add(
                f"{{J{a},J{b}}}-J{c}",
                lambda y, a=a, b=b, c=c: _pb_rel(j[a], j[b], y, j[c].value(y)),
            )
        for i in (1, 2, 3):
            cvec = rng.uniform(-1.0, 1.0, 3)
            a, b = {1: (2, 3), 2: (3, 1), 3: (1, 2)}[i]
            combo = scaled_sum("c.P", [(cvec[m - 1], p[m]) for m in (1, 2, 3)])

            def rot_residual(y, i=i, a=a, b=b, cvec=cvec, combo=combo):
                expect = cvec[a - 1] * p[b].value(y) - cvec[b - 1] * p[a].value(y)
                return _pb_rel(j[i], combo, y, expect)

            add(f"{{J{i},c.P}}-rotation", rot_residual)
        for ax in (1, 2, 3):
            co = coordinate(ax, kap)
            pn = ax
            add(
                f"{{{co.name},P{pn}}}-cos_k",
                lambda y, co=co, pn=pn: _pb_rel(co, p[pn], y, cos_k(kap, y[0])),
            )
    elif sid == "oscillator":
        al = spec.alpha

        def trace_residual(y):
            tr = sum(obs[f"K{i}{i}"].value(y) for i in (1, 2, 3))
            jsq = cat.aux["Jsq"].value(y)
            expect = 2.0 * h.value(y)
            return (tr + kap * jsq - expect) / max(1.0, abs(tr), abs(expect))

        add("alg:trace(K)+kappa*Jsq-2H", trace_residual)
        for a, b, c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
            ma, mb = cat.complexes[f"M{a}"], cat.complexes[f"M{b}"]
            kab = obs[f"K{a}{b}"] if f"K{a}{b}" in obs else obs[f"K{b}{a}"]

            def prod_residual(y, ma=ma, mb=mb, kab=kab, c=c):
                lhs = ma.value(y) * mb.value(y).conjugate()
                rhs = kab.value(y) + 1j * al * obs[f"J{c}"].value(y)
                return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))

            add(f"alg:M{a}*conj(M{b})-(K{a}{b}+i*alpha*J{c})", prod_residual)
        for jx in (1, 2, 3):
            m = cat.complexes[f"M{jx}"]

            def msq_residual(y, m=m, jx=jx):
                lhs = abs(m.value(y)) ** 2
                rhs = obs[f"K{jx}{jx}"].value(y)
                return (lhs - rhs) / max(1.0, abs(lhs), abs(rhs))

            add(f"alg:|M{jx}|^2-K{jx}{jx}", msq_residual)
        for jx in (1, 2, 3):
            m = cat.complexes[f"M{jx}"]

            def m_residual(y, m=m):
                lam = 1.0 / cos_k(kap, y[0]) ** 2
                return math.hypot(
                    _pb_rel(m.re, h, y, -lam * al * m.im.value(y)),
                    _pb_rel(m.im, h, y, lam * al * m.re.value(y)),
                )

            add(f"{{M{jx},H}}-i*lambda*alpha*M{jx}", m_residual)
        for i in (1, 2, 3):
            c1, c2 = rng.uniform(-1.0, 1.0, 2)
            from .observables import scaled_sum

            combo = scaled_sum(
                "combo", [(c1, obs[f"K{i}{i}"]), (c2, obs[f"J{i}"])]
            )
            add(
                f"{{c1*K{i}{i}+c2*J{i},W{i}}}",
                lambda y, combo=combo, i=i: _pb_rel(combo, obs[f"W{i}"], y),
            )
    elif sid == "sw":
        from .observables import scaled_sum

        ksum = spec.k1 + spec.k2 + spec.k3

        def trace_residual(y):
            tr = sum(obs[f"K{i}{i}"].value(y) for i in (1, 2, 3))
            kj = sum(obs[f"KJ{i}"].value(y) for i in (1, 2, 3))
            hv = h.value(y)
            lhs = 0.5 * (tr + kap * kj) + kap * ksum
            return (hv - lhs) / max(1.0, abs(hv), abs(lhs))

        add("alg:H-(trace(K)+kappa*trace(KJ))/2-kappa*(k1+k2+k3)", trace_residual)
        for a, b, c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
            add(
                f"{{KJ{a},KJ{b}+KJ{c}}}",
                lambda y, a=a, b=b, c=c: _pb_rel(obs[f"KJ{a}"], obs[_kj_sum_name(b, c)], y),
            )
        for i in (1, 2, 3):
            c1, c2 = rng.uniform(-1.0, 1.0, 2)
            combo = scaled_sum(
                "combo", [(c1, obs[f"K{i}{i}"]), (c2, obs[f"KJ{i}"])]
            )
            add(
                f"{{c1*K{i}{i}+c2*KJ{i},W{i}}}",
                lambda y, combo=combo, i=i: _pb_rel(combo, obs[f"W{i}"], y),
            )
    elif sid == "osc112":
        def recompose_residual(y):
            hv = h.value(y)
            lhs = 0.5 * (
                obs["K3"].value(y)
                + obs["K12"].value(y)
                + kap * obs["KJ3"].value(y)
            )
            return (hv - lhs) / max(1.0, abs(hv), abs(lhs))

        add("alg:H-(K3+K12+kappa*KJ3)/2", recompose_residual)
    elif sid == "kepler":
        from .observables import scaled_sum

        j = {i: obs[f"J{i}"] for i in (1, 2, 3)}
        krl = {i: obs[f"KRL{i}"] for i in (1, 2, 3)}
        jsq = cat.aux["Jsq"]
        for a, b, c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
            def rl_residual(y, a=a, b=b, c=c):
                rhs = -2.0 * j[c].value(y) * (h.value(y) - kap * jsq.value(y))
                return _pb_rel(krl[a], krl[b], y, rhs)

            add(f"{{KRL{a},KRL{b}}}+2J{c}(H-kappa*Jsq)", rl_residual)
        for i in (1, 2, 3):
            cvec = rng.uniform(-1.0, 1.0, 3)
            a, b = {1: (2, 3), 2: (3, 1), 3: (1, 2)}[i]
            combo = scaled_sum("c.KRL", [(cvec[m - 1], krl[m]) for m in (1, 2, 3)])

            def rot_residual(y, i=i, a=a, b=b, cvec=cvec, combo=combo):
                expect = cvec[a - 1] * krl[b].value(y) - cvec[b - 1] * krl[a].value(y)
                return _pb_rel(j[i], combo, y, expect)

            add(f"{{J{i},c.KRL}}-rotation", rot_residual)
    elif sid == "kepler123":
        ks = (spec.k1, spec.k2, spec.k3)
        for a, b, c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
            add(
                f"{{KJ{a},KJ{b}+KJ{c}}}",
                lambda y, a=a, b=b, c=c: _pb_rel(obs[f"KJ{a}"], obs[_kj_sum_name(b, c)], y),
            )
        for i in (1, 2, 3):
            r_obs = obs[f"R{i}"]
            s_obs = cat.aux[f"S{i}"]
            ki = ks[i - 1]

            def r_residual(y, r_obs=r_obs, s_obs=s_obs, i=i, ki=ki):
                lam = _lambda_coord(kap, i, y)
                return _pb_rel(r_obs, h, y, -2.0 * ki * lam * s_obs.value(y))

            def s_residual(y, r_obs=r_obs, s_obs=s_obs, i=i):
                lam = _lambda_coord(kap, i, y)
                return _pb_rel(s_obs, h, y, lam * r_obs.value(y))

            add(f"{{R{i},H}}+2k{i}*lambda{i}*S{i}", r_residual)
            add(f"{{S{i},H}}-lambda{i}*R{i}", s_residual)
    return out


def _kj_sum_name(b: int, c: int) -> str:
    pair = {frozenset((2, 3)): "KJ23", frozenset((3, 1)): "KJ31", frozenset((1, 2)): "KJ12"}
    return pair[frozenset((b, c))]


def _lambda_coord(kap: float, i: int, y) -> float:
    from .observables import kappa_cartesian
    from .geometry import PhaseState

    ps = PhaseState.from_array(np.asarray(y, dtype=float))
    coords = kappa_cartesian(kap, ps.q)
    c = coords[i - 1]
    if abs(c) < 1e-12:
        raise DomainSingularity("coordinate vanishes in coupling factor")
    return 1.0 / (c * c)


# ---------------------------------------------------------------------------
# Closed orbits.

@dataclass(frozen=True)
class ClosedOrbitResult:
    """Outcome of a closed-orbit search from one initial condition."""

    found: bool
    period: Optional[float]
    distance: float
    t_guard: float
    diagnostics: dict


def _wrap_angle(x: float) -> float:
    return (x + math.pi) % (2.0 * math.pi) - math.pi


def _orbit_scales(states: np.ndarray) -> np.ndarray:
    ranges = states.max(axis=0) - states.min(axis=0)
    ranges[2] = min(ranges[2], 2.0 * math.pi)
    return np.maximum(ranges, 1e-8)


def _normalized_distance(y: np.ndarray, y0: np.ndarray, scales: np.ndarray) -> float:
    d = y - y0
    d[2] = _wrap_angle(d[2])
    return float(np.linalg.norm(d / scales) / math.sqrt(6.0))


def closed_orbit_check(
    spec: SystemSpec,
    y0,
    t_max: float,
    return_tol: float = 1e-4,
    integrate_tol: float = 1e-12,
) -> ClosedOrbitResult:
    """Search for a return of the trajectory to its initial state.

    Integrates over [0, t_max], locates the best candidate return after
    a guard time (the second sign change of p_r, or a tenth of t_max if
    radial motion never turns), and refines the return time by golden
    section on the normalized phase-space distance.  Distances are
    normalized per component by the coordinate ranges explored by the
    orbit, with the azimuth compared modulo a full turn.
    """
    y0 = _as_array(y0).copy()
    rhs = hamilton_rhs(spec)
    traj = integrate(rhs, y0, (0.0, t_max), method="rk45_adaptive", tol=integrate_tol)
    diag = {"truncated": traj.truncated, "n_samples": len(traj.times)}
    scales = _orbit_scales(traj.states)
    dist = np.array([_normalized_distance(y, y0, scales) for y in traj.states])
    pr = traj.states[:, 3]
    signs = np.sign(pr)
    nz = signs != 0
    flips = np.nonzero(np.diff(signs[nz]) != 0)[0]
    if len(flips) >= 2:
        t_guard = traj.times[np.nonzero(nz)[0][flips[1] + 1]]
    else:
        t_guard = 0.1 * t_max
    mask = traj.times > t_guard
    if not np.any(mask):
        return ClosedOrbitResult(False, None, float("inf"), t_guard, diag)
    idx = np.nonzero(mask)[0]
    best = idx[np.argmin(dist[idx])]
    lo = max(best - 1, 0)
    hi = min(best + 1, len(traj.times) - 1)
    t_lo, t_hi = traj.times[lo], traj.times[hi]
    base_t = traj.times[lo]
    base_y = traj.states[lo].copy()

    def d_at(t: float) -> float:
        if t <= base_t + 1e-15:
            return _normalized_distance(base_y.copy(), y0, scales)
        span = t - base_t
        n = max(8, int(math.ceil(span / 1e-3)))
        step = span / n
        y = base_y.copy()
        tt = base_t
        for _ in range(n):
            y = _rk4_step(rhs, tt, y, step)
            tt += step
        return _normalized_distance(y, y0, scales)

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = t_lo, t_hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = d_at(c), d_at(d)
    for _ in range(80):
        if b - a < 1e-10:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = d_at(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = d_at(d)
    t_best = 0.5 * (a + b)
    d_best = d_at(t_best)
    diag["coarse_distance"] = float(dist[best])
    found = d_best < return_tol
    return ClosedOrbitResult(found, t_best if found else None, d_best, float(t_guard), diag)
