"""Conservative Camassa-Holm flow in Lagrangian variables.

    y_t = U,   U_t = -Q,   H_t = U^3 - r U^2 + r^2 U - 2 P (U - r)

with P and Q given by Green's-kernel integrals over the labels of
``G = (U^2 + 2rU - r^2) y_xi + H_xi``. Time stepping is classical RK4 with a
fixed step.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import BlowUp, CflViolation, NonMonotonicY, OffPlateau
from .helmholtz import kernel_sums_auto
from .lagrangian import LagrangianState
from .profiles import half_period_from_gaps


def _next(ls, f, jump=0.0):
    """Right neighbours of the nodes; the periodic wrap adds ``jump``."""
    if ls.periodic:
        return np.append(f[1:], f[0] + jump)
    return f[1:]


def _cell_split(ls, g):
    """Node masses ``(g_{i-1} + g_i)/2`` and half-differences ``(g_{i-1} - g_i)/2``.

    ``g`` holds one value per label cell. Splitting each cell's mass between its two
    end nodes is the trapezoid rule for Stieltjes integrals; the half-difference is
    what the odd (sign) kernel sees at its own node.
    """
    if ls.periodic:
        prev = np.roll(g, 1)
        return 0.5 * (prev + g), 0.5 * (prev - g)
    left = np.concatenate([[0.0], g])
    right = np.concatenate([g, [0.0]])
    return 0.5 * (left + right), 0.5 * (left - right)


def _cells(ls):
    """Per-cell increments ``dy, dU, dH`` and the cell averages of ``U``."""
    yn, Un, Hn = _next(ls, ls.y, 2 * ls.L if ls.periodic else 0.0), _next(ls, ls.U), \
        _next(ls, ls.H, 2 * ls.E if ls.periodic else 0.0)
    m = ls.y.size if ls.periodic else ls.y.size - 1
    y, U, H = ls.y[:m], ls.U[:m], ls.H[:m]
    return yn - y, Un - U, Hn - H, U, Un


def _g_cells(ls):
    """Cell masses of ``G dxi = (U^2 + 2rU - r^2) dy + dH`` (trapezoid in each cell)."""
    dy, dU, dH, U0, U1 = _cells(ls)
    r = ls.r
    f0, f1 = U0 ** 2 + 2 * r * U0 - r * r, U1 ** 2 + 2 * r * U1 - r * r
    return 0.5 * (f0 + f1) * dy + dH


MONOTONE_TOL = 1e-6


def _check_monotone(ls, tol=None):
    """Raise when characteristics cross by more than ``tol`` times the period (or span).

    Smaller crossings are discretization noise next to a cusp (y_xi ~ 0); the prefix
    sums tolerate them (see :func:`kernel_sums_auto`).
    """
    tol = MONOTONE_TOL if tol is None else tol
    scale = 2 * ls.L if ls.periodic else max(1.0, float(np.ptp(ls.y)))
    dmin = float(np.min(np.diff(ls.y))) if ls.n > 1 else 0.0
    if dmin < -tol * scale:
        raise NonMonotonicY(f"characteristics crossed by {-dmin:.3e} at t = {ls.t:.6g}")
    return dmin


def _cross_tol(ls):
    return MONOTONE_TOL * (2 * ls.L if ls.periodic else max(1.0, float(np.ptp(ls.y))))


def _line_tails(ls):
    """Distances to the window ends (the data continue with U = r, y_xi = 1 outside)."""
    return np.exp(-(ls.y - ls.y[0])), np.exp(-(ls.y[-1] - ls.y))


def compute_pq(ls: LagrangianState, return_flag=False):
    """Nonlocal ``(P, Q)`` at every label, O(N) when ``y`` is monotone.

    ``G dxi`` is discretized cell by cell; the sign kernel at its own node weighs the
    two adjacent half cells with opposite signs, so a jump of ``y_xi`` or ``H_xi``
    across a label (a moving peak, say) does not cost an order of accuracy.
    """
    _check_monotone(ls)
    c, half = _cell_split(ls, _g_cells(ls))
    r = ls.r
    tol = _cross_tol(ls)
    if ls.periodic:
        L = ls.L
        even, odd, fast = kernel_sums_auto(ls.y, c, L, tol)
        k = 1.0 / (4.0 * math.sinh(L))
        P, Q = k * even, -k * (odd + math.sinh(L) * half)
    else:
        even, odd, fast = kernel_sums_auto(ls.y, c, None, tol)
        left, right = _line_tails(ls)
        P = 0.25 * even + 0.5 * r * r * (left + right)
        Q = -0.25 * (odd + half) + 0.5 * r * r * (right - left)
    if return_flag:
        return P, Q, fast
    return P, Q


@dataclass(frozen=True, eq=False)
class RhsEval:
    P: np.ndarray
    Q: np.ndarray
    dy: np.ndarray
    dU: np.ndarray
    dH: np.ndarray


def h_rate(U, P, r):
    return U ** 3 - r * U ** 2 + r * r * U - 2.0 * P * (U - r)


def h_rate_shifted(U, P, r):
    """The same rate written in powers of ``U - r``."""
    v = U - r
    return v ** 3 + 2 * r * v ** 2 + 2 * r * r * v + r ** 3 - 2.0 * P * v


def rhs(ls: LagrangianState) -> RhsEval:
    P, Q = compute_pq(ls)
    return RhsEval(P=P, Q=Q, dy=ls.U.copy(), dU=-Q, dH=h_rate(ls.U, P, ls.r))


@dataclass
class SimConfig:
    dt: float
    T: float
    n_labels: int = 512
    labeling: str = "standard"
    snapshot_stride: int = 10
    cfl: float = 0.3

    def validate(self, ls):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise CflViolation("dt must be positive")
        if self.T < 0:
            raise CflViolation("T must be nonnegative")
        if ls.periodic:
            spacing = 2.0 * (ls.L + ls.E) / ls.n
        else:
            spacing = ls.dxi
        bound = self.cfl * spacing / max(1.0, float(np.max(np.abs(ls.U))))
        if self.dt > bound * (1 + 1e-12):
            raise CflViolation(f"dt = {self.dt:.4g} exceeds the CFL bound {bound:.4g} (cfl = {self.cfl})")
        return bound

    def to_dict(self):
        return asdict(self)


def cfl_dt(ls, cfl=0.3):
    spacing = 2.0 * (ls.L + ls.E) / ls.n if ls.periodic else ls.dxi
    return cfl * spacing / max(1.0, float(np.max(np.abs(ls.U))))


@dataclass
class Trajectory:
    states: list
    config: SimConfig
    steps: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def times(self):
        return np.array([s.t for s in self.states])

    @property
    def final(self):
        return self.states[-1]

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __getitem__(self, k):
        return self.states[k]


def _deriv(ls, y, U, H, t):
    s = ls.with_values(y, U, H, t)
    P, Q = compute_pq(s)
    return U, -Q, h_rate(U, P, ls.r)


def rk4_step(ls, dt):
    y, U, H, t = ls.y, ls.U, ls.H, ls.t
    k1 = _deriv(ls, y, U, H, t)
    k2 = _deriv(ls, y + 0.5 * dt * k1[0], U + 0.5 * dt * k1[1], H + 0.5 * dt * k1[2], t + 0.5 * dt)
    k3 = _deriv(ls, y + 0.5 * dt * k2[0], U + 0.5 * dt * k2[1], H + 0.5 * dt * k2[2], t + 0.5 * dt)
    k4 = _deriv(ls, y + dt * k3[0], U + dt * k3[1], H + dt * k3[2], t + dt)
    f = dt / 6.0
    y = y + f * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    U = U + f * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    H = H + f * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    return ls.with_values(y, U, H, t + dt)


def simulate(ls: LagrangianState, config: SimConfig, snapshot_times=None):
    """Fixed-step RK4 from ``ls.t`` to ``ls.t + config.T``.

    Snapshots every ``snapshot_stride`` steps plus the final state. The last step is
    shortened so the run ends exactly at ``T``. ``snapshot_times`` adds exact
    stops at the requested times.
    """
    config.validate(ls)
    t0, T, dt = ls.t, config.T, config.dt
    n_steps = max(0, int(math.ceil(T / dt - 1e-9)))
    stops = sorted(set(float(x) for x in (snapshot_times or []) if 0 < x < T))
    states = [ls]
    cur = ls
    step = 0
    while step < n_steps:
        target = t0 + min((step + 1) * dt, T)
        # honour requested stop times inside this step
        while stops and t0 + stops[0] < target - 1e-14:
            cur = rk4_step(cur, t0 + stops.pop(0) - cur.t)
            _guard(cur)
            states.append(cur)
        h = target - cur.t
        if h > 1e-15:
            cur = rk4_step(cur, h)
        step += 1
        _guard(cur)
        if stops and abs(cur.t - (t0 + stops[0])) < 1e-12:
            stops.pop(0)
            states.append(cur)
        elif step % config.snapshot_stride == 0 or step == n_steps:
            states.append(cur)
    return Trajectory(states=states, config=config, steps=n_steps)


def _guard(ls):
    if not (np.all(np.isfinite(ls.y)) and np.all(np.isfinite(ls.U)) and np.all(np.isfinite(ls.H))):
        raise BlowUp(f"non-finite state at t = {ls.t:.6g}")
    _check_monotone(ls)


# ----------------------------------------------------------------------------------------
# Q_t


def q_time_derivative_all(ls: LagrangianState):
    """``Q_t`` at every label from the two-integral formula (no time differencing).

    ``Q_t(xi) = k int (U(xi) - U(eta)) Kc G deta - k int sgn(xi - eta) Ks G_t deta`` with
    ``G_t = 4 U^2 U_xi - 4 U Q y_xi - 2 P U_xi`` (the reference level drops out).
    """
    P, Q = compute_pq(ls)
    dy, dU, dH, U0, U1 = _cells(ls)
    n0 = ls.y.size if ls.periodic else ls.y.size - 1
    P0, P1 = P[:n0], _next(ls, P)
    Q0, Q1 = Q[:n0], _next(ls, Q)
    U = ls.U
    g = _g_cells(ls)
    f0, f1 = U0 * (U0 ** 2 + 2 * ls.r * U0 - ls.r ** 2), U1 * (U1 ** 2 + 2 * ls.r * U1 - ls.r ** 2)
    ug = 0.5 * (f0 + f1) * dy + 0.5 * (U0 + U1) * dH
    gt = 0.5 * ((4 * U0 ** 2 - 2 * P0) + (4 * U1 ** 2 - 2 * P1)) * dU - 0.5 * (4 * U0 * Q0 + 4 * U1 * Q1) * dy
    c1, _ = _cell_split(ls, g)
    c2, _ = _cell_split(ls, ug)
    c3, h3 = _cell_split(ls, gt)
    tol = _cross_tol(ls)
    if ls.periodic:
        L = ls.L
        e1, _, _ = kernel_sums_auto(ls.y, c1, L, tol)
        e2, _, _ = kernel_sums_auto(ls.y, c2, L, tol)
        _, o3, _ = kernel_sums_auto(ls.y, c3, L, tol)
        k = 1.0 / (4.0 * math.sinh(L))
        return k * (U * e1 - e2) - k * (o3 + math.sinh(L) * h3)
    e1, _, _ = kernel_sums_auto(ls.y, c1, None, tol)
    e2, _, _ = kernel_sums_auto(ls.y, c2, None, tol)
    _, o3, _ = kernel_sums_auto(ls.y, c3, None, tol)
    left, right = _line_tails(ls)
    r = ls.r
    tail = 0.5 * (U - r) * r * r * (left + right)
    return 0.25 * (U * e1 - e2) + tail - 0.25 * (o3 + h3)


def q_time_derivative(ls: LagrangianState, xi):
    """``Q_t`` at label(s) ``xi`` (linear interpolation between grid labels)."""
    qt = q_time_derivative_all(ls)
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    if ls.periodic:
        P = ls.label_period
        base = ls.xis[0]
        xw = base + np.mod(xi_arr - base, P)
        xe = np.concatenate([ls.xis, [ls.xis[0] + P]])
        qe = np.concatenate([qt, [qt[0]]])
        out = np.interp(xw, xe, qe)
    else:
        out = np.interp(xi_arr, ls.xis, qt)
    return float(out[0]) if np.ndim(xi) == 0 else out


def q_time_derivative_fd(ls: LagrangianState, h):
    """Centered difference of Q in time using one RK4 step each way."""
    fwd = rk4_step(ls, h)
    bwd = rk4_step(ls, -h)
    return (compute_pq(fwd)[1] - compute_pq(bwd)[1]) / (2 * h)


def _position_of_label(ls, xi):
    xi = np.asarray(xi, dtype=float)
    if ls.periodic:
        xe, ye, _, _ = ls.extended(1)
        return np.interp(xi, xe, ye)
    return np.interp(xi, ls.xis, ls.y)


def plateau_labels(params, r=0.0):
    """Open label interval of the plateau under the standard map."""
    half = (1.0 + (params.s - r) ** 2) * params.ell
    return -half, half


def qt_closed_form_plateau(params, lstate0, xi):
    """Closed-form ``Q_t(0, xi)`` on the stumpon plateau.

    Periodic: ``sinh(L_phi) cosh(y) / (2 sinh(L_phi + ell)) (M-s)(s-m)(s-z)``;
    line: ``e^{-ell} cosh(y) (M-s)(s-m)^2 / 2`` with ``y = y(0, xi)``.
    """
    if params.kind != "stumpon":
        raise OffPlateau("plateau formula needs stumpon parameters")
    y = _position_of_label(lstate0, xi)
    if np.any(np.abs(y) >= params.ell):
        raise OffPlateau(f"label(s) {xi} map outside the plateau |y| < {params.ell}")
    if params.periodic:
        Lphi = lstate0.L - params.ell
        val = math.sinh(Lphi) * np.cosh(y) / (2.0 * math.sinh(Lphi + params.ell)) * params.jump_product
    else:
        val = 0.5 * math.exp(-params.ell) * np.cosh(y) * (params.M - params.s) * (params.s - params.m) ** 2
    return float(val) if np.ndim(val) == 0 else val


def _plateau_factor(Lphi, ell):
    return math.sinh(Lphi) / (2.0 * math.sinh(Lphi + ell))


def qt_plateau_periodic_value(params, Lphi, y=0.0):
    """Periodic plateau formula from explicit ``L_phi`` (no Lagrangian state needed)."""
    return _plateau_factor(Lphi, params.ell) * math.cosh(y) * params.jump_product


def qt_plateau_line_value(params, y=0.0):
    return 0.5 * math.exp(-params.ell) * math.cosh(y) * (params.M - params.s) * (params.s - params.m) ** 2


def stumpon_gaps(gap, m=-1.0):
    """Gaps ``(M - s, s - m)`` of the stumpon with ``m - z = gap`` and ``a = s^2``.

    Eliminating ``M = s - 2m + gap`` leaves ``s^2 + (2m - gap) s - (3m^2 - 3m gap + gap^2) = 0``;
    the larger root is taken. ``gap = 0`` is the decaying stumpon (needs ``m < 0``).
    """
    b = 2.0 * m - gap
    c = 3.0 * m * m - 3.0 * m * gap + gap * gap
    s = 0.5 * (-b + math.sqrt(b * b + 4.0 * c))
    return gap - 2.0 * m, s - m


def plateau_limit_check(Lphis=(5.0, 10.0, 20.0), m=-1.0, ell=0.5, y=0.0):
    """Periodic plateau ``Q_t`` times ``(1 - e^{-2L_phi-2ell}) / (1 - e^{-2L_phi})`` against the line value.

    For each target ``L_phi`` the gap ``m - z`` is found by root-finding on the cuspon
    half period (computed from the gaps, so tiny gaps stay exact); the line value uses
    the decaying stumpon at ``z = m``.
    """
    Ms0, sm0 = stumpon_gaps(0.0, m)
    line = 0.5 * math.exp(-ell) * math.cosh(y) * Ms0 * sm0 ** 2
    out = []
    for Lphi in Lphis:
        def f(lg):
            Ms, sm = stumpon_gaps(math.exp(lg), m)
            return half_period_from_gaps(Ms, sm, math.exp(lg)) - Lphi
        lg = brentq(f, math.log(1e-300), math.log(10.0), xtol=1e-12)
        gap = math.exp(lg)
        Ms, sm = stumpon_gaps(gap, m)
        per = _plateau_factor(Lphi, ell) * math.cosh(y) * Ms * sm * (sm + gap)
        scaled = per * (1.0 - math.exp(-2.0 * Lphi - 2.0 * ell)) / (1.0 - math.exp(-2.0 * Lphi))
        out.append({"Lphi": float(Lphi), "gap": gap, "periodic": per, "scaled": scaled,
                    "line": line, "rel": abs(scaled - line) / abs(line)})
    return out


@dataclass
class TaylorReport:
    times: np.ndarray
    deviations: np.ndarray
    qt: float
    C: float
    max_deviation: float
    xi: float

    def to_dict(self):
        return {"times": self.times.tolist(), "deviations": self.deviations.tolist(), "qt": self.qt,
                "C": self.C, "max_deviation": self.max_deviation, "xi": self.xi}


def plateau_taylor_check(trajectory, params, xi=0.0, t_max=0.2):
    """Compare ``U(t, xi) - s`` with ``-t^2/2 Q_t(0, xi)``; ``C = max |deviation| / t^3``."""
    ls0 = trajectory[0]
    qt = qt_closed_form_plateau(params, ls0, xi)
    ts, devs = [], []
    for st in trajectory:
        t = st.t - ls0.t
        if t <= 0 or t > t_max + 1e-12:
            continue
        U = _label_value(st, st.U, xi)
        ts.append(t)
        devs.append(U - params.s + 0.5 * t * t * qt)
    ts, devs = np.array(ts), np.array(devs)
    C = float(np.max(np.abs(devs) / ts ** 3)) if ts.size else 0.0
    return TaylorReport(ts, devs, float(qt), C, float(np.max(np.abs(devs))) if devs.size else 0.0, float(xi))


def _label_value(ls, f, xi):
    if ls.periodic:
        P = ls.label_period
        xw = ls.xis[0] + np.mod(xi - ls.xis[0], P)
        return float(np.interp(xw, np.append(ls.xis, ls.xis[0] + P), np.append(f, f[0])))
    return float(np.interp(xi, ls.xis, f))


def plateau_deviation(ls, params, r=0.0):
    """Max over plateau labels of ``|U - s|``."""
    a, b = plateau_labels(params, r)
    on = (ls.xis > a) & (ls.xis < b)
    return float(np.max(np.abs(ls.U[on] - params.s))) if on.any() else 0.0


def longest_flat_run(x, u, level, tol=1e-4):
    """Longest interval (in x) over which ``|u - level| <= tol`` holds at consecutive samples."""
    ok = np.abs(np.asarray(u) - level) <= tol
    best, start = 0.0, None
    for i, flag in enumerate(ok):
        if flag and start is None:
            start = i
        if (not flag or i == ok.size - 1) and start is not None:
            end = i if flag else i - 1
            best = max(best, float(x[end] - x[start]))
            start = None
    return best
