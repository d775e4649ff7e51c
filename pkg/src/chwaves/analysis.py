"""Verification instruments: energy, the flux jump at gluing lines, peakon characteristics."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import OrderingViolation, OutOfRange
from .evolution import plateau_labels
from .helmholtz import p_closed_form_at
from .profiles import peakon_half_period
from .quadrature import gauss_nodes


@dataclass
class DiagnosticsReport:
    energy_series: list = field(default_factory=list)
    jump_value: float | None = None
    jump_expected: float | None = None
    char_error: float | None = None
    notes: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "energy_series": [[float(t), float(e)] for t, e in self.energy_series],
            "jump_value": self.jump_value,
            "jump_expected": self.jump_expected,
            "char_error": self.char_error,
            "notes": self.notes,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), sort_keys=True, **kw)


# ----------------------------------------------------------------------------------------
# energy


def energy(state, include_atoms=True, from_samples=False):
    """``int (u - r)^2 + u_x^2`` over one period (or the window), plus atom masses.

    By default the ac part is the mass of ``state.mu``. With ``from_samples=True``
    it is recomputed from the ``u`` samples alone: trapezoid for ``(u - r)^2`` and
    ``sum (du)^2 / dx`` for the slope term, which is exact for piecewise-linear ``u``.
    """
    if not from_samples:
        e = state.mu.ac_mass()
    else:
        xs, u, r = np.asarray(state.xs, float), np.asarray(state.u, float), state.r
        if state.periodic:
            x2 = np.append(xs, xs[0] + state.period)
            u2 = np.append(u, u[0])
        else:
            x2, u2 = xs, u
        dx, du = np.diff(x2), np.diff(u2)
        v = (u2 - r) ** 2
        e = float(np.sum(0.5 * (v[1:] + v[:-1]) * dx) + np.sum(du * du / dx))
    if include_atoms:
        e += state.mu.atom_mass()
    return float(e)


def lagrangian_energy(ls):
    """Energy of the piecewise-linear Eulerian image of ``(y, U)`` over one period.

    Independent of ``H``; compares with ``2E`` to expose drift of the energy-density
    identity. Label cells that collapsed (``dy <= 0``) are counted with ``dy`` floored
    at a tiny positive value.
    """
    y, U, r = ls.y, ls.U, ls.r
    if ls.periodic:
        y = np.append(y, y[0] + 2 * ls.L)
        U = np.append(U, U[0])
    dy, dU = np.diff(y), np.diff(U)
    dy = np.maximum(dy, 1e-300)
    v = (U - r) ** 2
    return float(np.sum(0.5 * (v[1:] + v[:-1]) * dy) + np.sum(dU * dU / dy))


def energy_history(trajectory):
    return [(s.t, lagrangian_energy(s)) for s in trajectory]


# ----------------------------------------------------------------------------------------
# flux jump


def _flux(profile, x, use_identity=False):
    p = profile.params
    u, ux = profile.evaluate(np.asarray(x, dtype=float))
    P = p_closed_form_at(p, u)
    if use_identity:
        first = -(p.M - u) * (u - p.m) * (u - p.z)
        if p.kind == "stumpon":
            first = np.where(np.abs(np.asarray(x) - profile.center) < p.ell, 0.0, first)
    else:
        first = ux * ux * (u - p.s)
    return first - u * u * p.s + 2.0 * P * u


def richardson_limit(values, hs, exponents):
    """Extrapolate ``f(h) = f0 + sum_k c_k h^{p_k}`` to ``h = 0`` from ``len(exponents)+1`` samples."""
    hs = np.asarray(hs, dtype=float)
    A = np.column_stack([np.ones_like(hs)] + [hs ** q for q in exponents])
    coef = np.linalg.solve(A, np.asarray(values, dtype=float))
    return float(coef[0])


def one_sided_limit(profile, x_line, side, h0=None, levels=4, ratio=0.5, use_identity=False):
    """Limit of the flux at ``x_line`` from ``side`` (+1 right, -1 left).

    Geometric approach points ``h0 * ratio**k``; the flux behaves like a series in
    ``h^(2/3)`` next to a cusp, so the Richardson exponents are 2/3, 4/3, 2, ...
    """
    if h0 is None:
        h0 = 0.05 * min(1.0, profile.half_period if math.isfinite(profile.half_period) else 1.0)
        if profile.params.kind == "stumpon" and profile.params.ell > 0:
            h0 = min(h0, 0.5 * profile.params.ell)
    hs = h0 * ratio ** np.arange(levels)
    vals = _flux(profile, x_line + side * hs, use_identity)
    return richardson_limit(vals, hs, [2.0 * (k + 1) / 3.0 for k in range(levels - 1)])


@dataclass
class JumpReport:
    jump_value: float
    jump_expected: float
    jump_left: float
    jump_right: float
    limits: dict

    def to_dict(self):
        return {"jump_value": self.jump_value, "jump_expected": self.jump_expected,
                "jump_left": self.jump_left, "jump_right": self.jump_right, "limits": self.limits}


def conservation_jump(profile, levels=4, ratio=0.5, use_identity=False):
    """Flux jump ``F(left) - F(right)`` across the gluing lines (stumpon) or the cusp (cuspon).

    ``F = u_x^2 (u - s) - u^2 s + 2 P u`` with P from the closed form. ``jump_right`` is
    taken at ``+ell``; ``jump_left`` at ``-ell`` has the opposite orientation, so for a
    stumpon ``jump_right = -jump_left = (M-s)(s-m)(s-z)``. ``jump_value`` is
    ``jump_right``. Profiles are translation invariant here: lines are located from
    the profile center.
    """
    p = profile.params
    if p.kind not in ("cuspon", "stumpon"):
        raise OrderingViolation("conservation_jump needs a cuspon or stumpon profile")
    c = profile.center
    ell = p.ell if p.kind == "stumpon" else 0.0
    kw = dict(levels=levels, ratio=ratio, use_identity=use_identity)
    lim = {}
    for name, xl in (("left", c - ell), ("right", c + ell)):
        lim[name] = (one_sided_limit(profile, xl, -1, **kw), one_sided_limit(profile, xl, +1, **kw))
    jl = lim["left"][0] - lim["left"][1]
    jr = lim["right"][0] - lim["right"][1]
    expected = p.jump_product if (p.kind == "stumpon" and ell > 0) else 0.0
    return JumpReport(jump_value=float(jr), jump_expected=float(expected), jump_left=float(jl),
                      jump_right=float(jr), limits={k: list(v) for k, v in lim.items()})


def _bump(r):
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = np.abs(r) < 1
    q = 1.0 - r[inside] ** 2
    out[inside] = np.exp(-1.0 / q)
    return out


def _bump_d(r):
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = np.abs(r) < 1
    q = 1.0 - r[inside] ** 2
    out[inside] = np.exp(-1.0 / q) * (-2.0 * r[inside] / q ** 2)
    return out


def _composite(a, b, panels, order=20):
    x, w = gauss_nodes(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return pts, wts


@dataclass
class WeakCheck:
    residual: float
    predicted: float
    line_integral: float
    rel_error: float

    def to_dict(self):
        return dict(residual=self.residual, predicted=self.predicted,
                    line_integral=self.line_integral, rel_error=self.rel_error)


def weak_residual_check(profile, jump=None, t_c=0.5, tau=0.3, rho=0.3, panels=48):
    """Integrate the energy balance against a bump straddling the left gluing line.

    ``R = iint (u^2 + u_x^2) Phi_t + (u (u^2 + u_x^2) - u^3 + 2 P u) Phi_x dx dt`` for the
    traveling wave ``u = psi(x - s t)``, with ``Phi`` a product bump of radii ``tau`` in t and
    ``rho`` in x centered on ``x = s t_c - ell``. A flux jump ``J`` (left-minus-right,
    taken at the right line) predicts ``R = -J int Phi(t, s t - ell) dt``.
    """
    p = profile.params
    s, ell, c = p.s, p.ell, profile.center
    if jump is None:
        jump = conservation_jump(profile).jump_value
    x_c = c + s * t_c - ell
    # moving coordinate zeta = x - s t; the gluing line is zeta = c - ell
    zl = c - ell
    reach = rho + abs(s) * tau
    # cusp side (zeta < zl): zeta = zl - w^3 flattens the |zeta - zl|^{-2/3} density
    wmax = reach ** (1.0 / 3.0)
    w, ww = _composite(0.0, wmax, panels)
    z_left = zl - w ** 3
    wz_left = ww * 3 * w ** 2
    z_right, wz_right = _composite(zl, zl + reach, panels)
    z = np.concatenate([z_left, z_right])
    wz = np.concatenate([wz_left, wz_right])
    u, ux = profile.evaluate(z)
    on_line = ~np.isfinite(ux)
    ux = np.where(on_line, 0.0, ux)
    P = p_closed_form_at(p, u)
    eta = u * u + ux * ux
    q = u * eta - u ** 3 + 2.0 * P * u
    t, wt = _composite(t_c - tau, t_c + tau, panels)
    T, Z = np.meshgrid(t, z, indexing="ij")
    X = Z + s * T
    bt, dbt = _bump((T - t_c) / tau), _bump_d((T - t_c) / tau) / tau
    bx, dbx = _bump((X - x_c) / rho), _bump_d((X - x_c) / rho) / rho
    Phi_t, Phi_x = dbt * bx, bt * dbx
    integrand = eta[None, :] * Phi_t + q[None, :] * Phi_x
    R = float(wt @ integrand @ wz)
    line = float(np.sum(wt * _bump((t - t_c) / tau) * _bump((zl + s * t - x_c) / rho)))
    pred = -jump * line
    rel = abs(R - pred) / max(abs(pred), 1e-300)
    return WeakCheck(residual=R, predicted=pred, line_integral=line, rel_error=float(rel))


# ----------------------------------------------------------------------------------------
# peakon characteristics


def peakon_characteristic_exact(params, w0, t):
    """Offset ``w(t)`` of a characteristic from the moving trough (periodic) or peak (decay)."""
    s = params.s
    w0 = np.asarray(w0, dtype=float)
    t = np.asarray(t, dtype=float)
    if params.family == "peakon-decay":
        sg = np.sign(w0)
        return sg * np.log1p(np.expm1(np.abs(w0)) * np.exp(-sg * s * t))
    if params.family != "peakon-periodic":
        raise OrderingViolation("peakon_characteristic_exact needs a peakon family")
    L = peakon_half_period(params)
    if np.any(np.abs(w0) > L * (1 + 1e-12)):
        raise OutOfRange(f"|w0| must not exceed L = {L:.6g}")
    w0c = np.clip(w0, -L, L)
    k = math.tanh(L / 2)
    edge = np.abs(np.abs(w0c) - L) <= 1e-14 * L
    ratio = np.where(edge, 0.0, np.tanh(w0c / 2) / k)
    inner = s * t * math.tanh(L) / 2 - np.arctanh(ratio)
    w = -2.0 * np.arctanh(k * np.tanh(inner))
    return np.where(edge, w0c, w)


def peakon_characteristic_y(params, y0, t, x0):
    """Exact position at time ``t`` of the characteristic starting at ``y0``."""
    y0 = np.asarray(y0, dtype=float)
    s = params.s
    if params.family == "peakon-decay":
        return peakon_characteristic_exact(params, y0 - x0, t) + s * t + x0
    L = peakon_half_period(params)
    # reduce to the cell [x0 - L, x0 + L] around a trough, remember the shift
    k = np.floor((y0 - x0 + L) / (2 * L))
    w0 = y0 - x0 - 2 * L * k
    return peakon_characteristic_exact(params, w0, t) + s * t + x0 + 2 * L * k


def characteristics_compare(trajectory, params, x0, per_snapshot=False, w_max=None):
    """Sup over labels and snapshots of ``|y_numeric - y_exact|``.

    ``w_max`` restricts the sup to characteristics starting within ``w_max`` of the
    trough (periodic) or peak (decay) of the cell they start in.
    """
    y0 = trajectory[0].y
    t0 = trajectory[0].t
    sel = slice(None)
    if w_max is not None:
        if params.family == "peakon-periodic":
            L = peakon_half_period(params)
            w0 = y0 - x0 - 2 * L * np.floor((y0 - x0 + L) / (2 * L))
        else:
            w0 = y0 - x0
        sel = np.abs(w0) <= w_max
    errs = []
    for st in trajectory:
        exact = peakon_characteristic_y(params, y0[sel], st.t - t0, x0)
        errs.append(float(np.max(np.abs(st.y[sel] - exact))))
    return errs if per_snapshot else max(errs)


def trough_label(ls, x0):
    """Index of the label whose characteristic starts closest to ``x0``."""
    return int(np.argmin(np.abs(ls.y - x0)))


# ----------------------------------------------------------------------------------------
# run-level drifts


def energy_drift(trajectory):
    """``(endpoint, max excursion)`` of the relative change of :func:`lagrangian_energy`.

    The excursion includes the sampling oscillation of the piecewise-linear estimator
    as singular points move between labels; the endpoint value does not average it out
    but is the quantity a conservation check should bound.
    """
    E = np.array([lagrangian_energy(s) for s in trajectory])
    return float(abs(E[-1] - E[0]) / E[0]), float(np.max(np.abs(E - E[0])) / E[0])


def identity_drift(ls0, ls, floor=0.1):
    """Relative change of the energy-density defect where ``y_xi > floor`` at both times."""
    yx0, _, Hx0 = ls0.derivatives()
    yx, _, _ = ls.derivatives()
    ok = (yx0 > floor) & (yx > floor)
    scale = float(np.max(np.abs(yx0[ok] * Hx0[ok])))
    return float(np.max(np.abs(ls.energy_defect()[ok] - ls0.energy_defect()[ok])) / scale)


def translate_fit(ls, profile, shift, window=0.05):
    """Compare the Eulerian image of ``ls`` with ``profile`` translated by ``shift``.

    Returns ``(sup_error, lag)``: the sup over labels of ``|U - phi(y - shift)|`` and the
    extra displacement ``lag`` in ``[-window, window]`` that best aligns the two (least
    squares). Positive ``lag`` means the numerical wave is ahead.
    """
    x, u = ls.y, ls.U
    sup = float(np.max(np.abs(u - profile.evaluate(x - shift)[0])))
    res = minimize_scalar(lambda d: float(np.sum((u - profile.evaluate(x - shift - d)[0]) ** 2)),
                          bounds=(-window, window), method="bounded", options={"xatol": 1e-11})
    return sup, float(res.x)


def edge_asymmetry(ls, params, width=0.5):
    """Observed state just outside each end of the plateau labels.

    For each side, over labels within ``width`` of the plateau: the largest ``U``,
    the steepest Eulerian slope ``|U_xi / y_xi|`` and the smallest ``y_xi``. Purely
    descriptive; nothing here predicts which side steepens.
    """
    a, b = plateau_labels(params, ls.r)
    yx, Ux, _ = ls.derivatives()
    slope = np.abs(Ux) / np.maximum(yx, 1e-300)
    xi = ls.xis
    if ls.periodic:
        # fold labels into the cell around the plateau
        xi = a + np.mod(xi - a + 0.5 * ls.label_period, ls.label_period) - 0.5 * ls.label_period
    out = {}
    for side, sel in (("left", (xi < a) & (xi > a - width)), ("right", (xi > b) & (xi < b + width))):
        out[side] = {"max_u": float(ls.U[sel].max()), "max_slope": float(slope[sel].max()),
                     "min_y_xi": float(yx[sel].min())}
    return out
