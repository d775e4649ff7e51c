"""Eulerian (u, mu) <-> Lagrangian (y, U, H) transforms, periodic and on the line.

The standard map sends a label xi to the generalized inverse of
``x -> x + mu([0, x))``, so energy concentrated in an atom of ``mu`` opens a flat
stretch of ``y`` on which ``H = xi - y`` grows with unit slope. The identity
labeling (``y = xi``) is also available; it is not a valid relabeling in general
but is convenient for smooth data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AtomsPresent, NonMonotonicY
from .helmholtz import EulerianState, Measure


@dataclass(frozen=True, eq=False)
class LagrangianState:
    """Labels ``xis`` (uniform) with characteristics ``y``, velocity ``U`` and energy ``H``.

    Periodic states (``L`` not None) store one label period; beyond it
    ``y -> y + 2L``, ``U -> U``, ``H -> H + 2E`` every ``label_period``. Line states
    assume ``U = r`` and ``y_xi = 1`` outside the window.
    """

    xis: np.ndarray
    y: np.ndarray
    U: np.ndarray
    H: np.ndarray
    r: float = 0.0
    L: float | None = None
    E: float = 0.0
    t: float = 0.0
    labeling: str = "standard"
    label_period: float | None = None
    meta: dict = field(default_factory=dict, repr=False)

    @property
    def periodic(self):
        return self.L is not None

    @property
    def n(self):
        return self.xis.size

    @property
    def dxi(self):
        return float(self.xis[1] - self.xis[0])

    def with_values(self, y, U, H, t):
        return replace(self, y=y, U=U, H=H, t=t)

    def extended(self, k=1):
        """Arrays extended by ``k`` periods on each side (periodic) for interpolation."""
        if not self.periodic:
            return self.xis, self.y, self.U, self.H
        xs, ys, Us, Hs = [], [], [], []
        for j in range(-k, k + 1):
            xs.append(self.xis + j * self.label_period)
            ys.append(self.y + 2 * j * self.L)
            Us.append(self.U)
            Hs.append(self.H + 2 * j * self.E)
        return tuple(np.concatenate(a) for a in (xs, ys, Us, Hs))

    def mirrored(self):
        """Image under ``(x, u) -> (-x, -u)``: ``(y, U, H)(xi) -> -(y, U, H)(-xi)``, ``r -> -r``.

        The flow commutes with this map. The label grid must be symmetric about 0
        (modulo the label period when periodic).
        """
        n, h = self.n, self.dxi
        if self.periodic:
            k0 = (-self.xis[0] - self.xis[0]) / h - n
            if abs(k0 - round(k0)) > 1e-9 or round(k0) % n:
                raise ValueError("label grid is not symmetric about 0")
            idx = (n - np.arange(n)) % n
            wrap = np.zeros(n)
            wrap[0] = 1.0
            y = -(self.y[idx] + 2 * self.L * wrap)
            H = -(self.H[idx] + 2 * self.E * wrap)
            U = -self.U[idx]
        else:
            if not np.allclose(-self.xis[::-1], self.xis, rtol=0, atol=1e-12 * max(1.0, h)):
                raise ValueError("label grid is not symmetric about 0")
            y, U, H = -self.y[::-1], -self.U[::-1], -self.H[::-1]
        return replace(self, y=y, U=U, H=H, r=-self.r)

    def derivatives(self):
        """Central differences ``(y_xi, U_xi, H_xi)``; periodic wrap or one-sided at line ends."""
        h = self.dxi
        if self.periodic:
            out = []
            for f, jump in ((self.y, 2 * self.L), (self.U, 0.0), (self.H, 2 * self.E)):
                nxt = np.append(f[1:], f[0] + jump)
                prv = np.insert(f[:-1], 0, f[-1] - jump)
                out.append((nxt - prv) / (2 * h))
            return tuple(out)
        return tuple(np.gradient(f, h, edge_order=2) for f in (self.y, self.U, self.H))

    def energy_defect(self):
        """``y_xi H_xi - (U - r)^2 y_xi^2 - U_xi^2`` at each label."""
        yx, Ux, Hx = self.derivatives()
        return yx * Hx - (self.U - self.r) ** 2 * yx ** 2 - Ux ** 2

    def total_energy(self):
        """``2E`` (periodic: H increment per label period) or the window H-mass (line)."""
        if self.periodic:
            return 2.0 * self.E
        return float(self.H[-1] - self.H[0] - 0.0)

    def check(self, tol=1e-12):
        scale = max(1.0, float(np.max(np.abs(self.y))))
        dy = np.diff(self.y)
        if np.any(dy < -tol * scale):
            raise NonMonotonicY(f"y decreases by {-dy.min():.3e}")
        return True


# ----------------------------------------------------------------------------------------


def _node_cumulative(state):
    """Signed ac mass mu([0, x_j)) at the samples and the atoms as a sorted array."""
    mu = state.mu
    xs = np.asarray(state.xs, dtype=float)
    if mu.cumulative is not None:
        cum = mu.cumulative(xs) - float(mu.cumulative(np.array([0.0]))[0])
    else:
        cm = mu.cell_masses()
        cum = np.concatenate([[0.0], np.cumsum(cm[: xs.size - 1])])
        if mu.periodic:
            # the origin may lie outside the sampled period
            P, A = mu.period, float(np.sum(cm))
            k = math.floor((0.0 - xs[0]) / P)
            c0 = np.interp(-k * P, np.append(xs, xs[0] + P), np.append(cum, A)) + k * A
        else:
            c0 = np.interp(0.0, xs, cum)
        cum = cum - c0
    atoms = sorted(mu.atoms)
    return xs, cum, atoms


def _periodic_nodes(state, lo, hi):
    """Samples, signed cumulative and atoms repeated periodically to cover ``[lo, hi]``."""
    xs, cum, atoms = _node_cumulative(state)
    P, A = state.period, state.mu.ac_mass()
    k0 = math.floor((lo - xs[0]) / P) - 1
    k1 = math.ceil((hi - xs[0]) / P) + 1
    ks = range(k0, k1 + 1)
    xe = np.concatenate([xs + k * P for k in ks])
    ce = np.concatenate([cum + k * A for k in ks])
    ae = sorted((pos + k * P, m) for k in ks for pos, m in atoms)
    return xe, ce, ae


def _atom_mass_below(x, atoms, inclusive=False):
    out = np.zeros_like(np.asarray(x, dtype=float))
    for pos, mass in atoms:
        below = (pos <= x) if inclusive else (pos < x)
        # mu([0, x)) is signed: atoms in [x, 0) count negatively for x < 0
        out += np.where(below & (pos >= 0), mass, 0.0)
        out -= np.where(~below & (pos < 0), mass, 0.0)
    return out


def _generalized_inverse(state, xis, period=None):
    """``y(xi) = sup{x : x + mu([0, x)) < xi}`` from the piecewise-linear F on the samples."""
    if period is not None:
        # every label lands within one period of the origin's cell
        L = 0.5 * period
        xs, cum, atoms = _periodic_nodes(state, -L - period, L + period)
    else:
        xs, cum, atoms = _node_cumulative(state)
    # F before (left limit) and after each node
    F_left = xs + cum + _atom_mass_below(xs, atoms)
    F_right = xs + cum + _atom_mass_below(xs, atoms, inclusive=True)
    # polyline through (F_left_j, x_j), (F_right_j, x_j)
    Fp = np.empty(2 * xs.size)
    Xp = np.empty(2 * xs.size)
    Fp[0::2], Fp[1::2] = F_left, F_right
    Xp[0::2], Xp[1::2] = xs, xs
    y = np.interp(xis, Fp, Xp)
    return y, (xs, cum, atoms)


def _refine_exact(y, xis, xs, state, iters=48):
    """Bisection on the exact cumulative inside each sample cell (no atoms)."""
    F0 = float(state.mu.cumulative(np.array([0.0]))[0])
    F = lambda x: x + state.mu.cumulative(x) - F0  # noqa: E731
    j = np.clip(np.searchsorted(xs, y, side="right") - 1, 0, xs.size - 2)
    # one extra cell on each side in case the linear guess sits at a cell boundary
    jl, jh = np.clip(j - 1, 0, xs.size - 1), np.clip(j + 2, 0, xs.size - 1)
    lo, hi = xs[jl], xs[jh]
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = F(mid) < xis
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def to_lagrangian(state: EulerianState, n_labels=512, refine=True, labels=None):
    """Standard map. Periodic labels cover ``[-(L+E), L+E)``; line labels cover the window.

    ``labels`` overrides the uniform label grid (useful for probing single labels;
    the result is then not suitable for time stepping).

    With an exact ``source`` profile and no atoms, ``y`` is refined against the exact
    cumulative energy and ``U`` is evaluated exactly; otherwise both come from
    piecewise-linear interpolation of the samples.
    """
    xs = np.asarray(state.xs, dtype=float)
    n = int(n_labels)
    if state.periodic:
        period = state.period
        L = 0.5 * period
        E = 0.5 * state.mu.total_mass()
        label_period = 2.0 * (L + E)
        # labels centered on the origin; x = 0 sits at label 0
        # x + mu([0, x)) maps [-L, L) onto [-(L+E), L+E) for data starting at -L
        xis = -(L + E) + label_period * np.arange(n) / n if labels is None else np.asarray(labels, float)
        y, (xn, cum, atoms) = _generalized_inverse(state, xis, period)
    else:
        _, cum, atoms = _node_cumulative(state)
        F0 = xs[0] + cum[0] + _atom_mass_below(xs[:1], atoms)[0]
        F1 = xs[-1] + cum[-1] + _atom_mass_below(xs[-1:], atoms, True)[0]
        xis = np.linspace(F0, F1, n) if labels is None else np.asarray(labels, float)
        y, (xn, cum, atoms) = _generalized_inverse(state, xis)
        L, E, label_period = None, 0.5 * state.mu.total_mass(), None
    exact = refine and state.source is not None and state.mu.cumulative is not None and not state.mu.atoms
    if exact:
        y = _refine_exact(y, xis, xn, state)
        U = state.source.evaluate(y)[0]
    else:
        U = _interp_u(state, y)
    H = xis - y
    meta = {"source": "standard"}
    ls = LagrangianState(xis=xis, y=y, U=U, H=H, r=state.r, L=L, E=E, t=0.0, labeling="standard",
                         label_period=label_period, meta=meta)
    ls.check()
    return ls


def _interp_u(state, x):
    xs, u = np.asarray(state.xs, dtype=float), np.asarray(state.u, dtype=float)
    if state.periodic:
        return np.interp(x, xs, u, period=state.period)
    return np.interp(x, xs, u)


def identity_labeling(state: EulerianState):
    """``y = xi``, ``U = u``, ``H`` = cumulative energy from the origin (signed)."""
    if state.mu.atoms:
        raise AtomsPresent("identity labeling needs a purely absolutely continuous measure")
    xs = np.asarray(state.xs, dtype=float)
    h = np.diff(xs)
    if xs.size > 2 and np.ptp(h) > 1e-9 * np.mean(h):
        raise ValueError("identity labeling needs uniformly spaced samples")
    _, cum, _ = _node_cumulative(state)
    if state.periodic:
        L = 0.5 * state.period
        E = 0.5 * state.mu.ac_mass()
        label_period = 2.0 * L
    else:
        L, E, label_period = None, 0.5 * state.mu.ac_mass(), None
    U = np.asarray(state.u, dtype=float).copy()
    return LagrangianState(xis=xs.copy(), y=xs.copy(), U=U, H=cum, r=state.r, L=L, E=E, t=0.0,
                           labeling="identity", label_period=label_period, meta={"source": "identity"})


def to_eulerian(lstate: LagrangianState, out_grid=None, flat_eps=None):
    """Push ``(y, U, H)`` forward to ``(u, mu)`` sampled on ``out_grid``.

    ``u`` is the piecewise-linear inverse of ``y``; label cells where ``y`` does not
    move (less than ``flat_eps``, default ``1e-10`` times the span) become atoms carrying
    their ``H`` increment, the rest spread ``dH`` uniformly over ``dy``.
    """
    y, U, H = lstate.y, lstate.U, lstate.H
    scale = max(1e-300, float(np.ptp(y)) if y.size else 1.0)
    if np.any(np.diff(y) < -1e-12 * max(1.0, float(np.max(np.abs(y))))):
        raise NonMonotonicY("y must be nondecreasing")
    if lstate.periodic:
        period = 2.0 * lstate.L
        if out_grid is None:
            out_grid = -lstate.L + period * np.arange(lstate.n) / lstate.n
        og = np.asarray(out_grid, dtype=float)
        reach = max(float(y[0] - og.min()), float(og.max() - y[-1]), 0.0)
        xi, ye, Ue, He = lstate.extended(1 + math.ceil(reach / period))
    else:
        xi, ye, Ue, He = lstate.xis, y, U, H
        period = None
        if out_grid is None:
            out_grid = np.linspace(y[0], y[-1], lstate.n)
    out_grid = np.asarray(out_grid, dtype=float)
    flat_eps = 1e-10 * scale if flat_eps is None else flat_eps
    dy, dH = np.diff(ye), np.diff(He)
    flat = dy < flat_eps
    # atoms: runs of flat label cells, collected within the base period only
    atoms = []
    if flat.any():
        base_lo = y[0] if not lstate.periodic else -lstate.L
        i = 0
        while i < flat.size:
            if flat[i]:
                j = i
                while j + 1 < flat.size and flat[j + 1]:
                    j += 1
                pos = float(ye[i])
                mass = float(He[j + 1] - He[i])
                if not lstate.periodic or (base_lo <= pos < base_lo + period):
                    atoms.append((pos, mass))
                i = j + 1
            else:
                i += 1
    # ac cumulative along y: H increments on moving cells only
    ac_inc = np.where(flat, 0.0, dH)
    ac_cum = np.concatenate([[0.0], np.cumsum(ac_inc)])
    keep = np.concatenate([[True], ~flat])
    yk, ck, Uk = ye[keep], ac_cum[keep], Ue[keep]
    x_eval = out_grid
    u = np.interp(x_eval, yk, Uk)
    dens_cell = ac_inc[~flat] / dy[~flat]
    ymid = 0.5 * (ye[:-1] + ye[1:])[~flat]
    dens = np.interp(x_eval, ymid, dens_cell)
    ref = float(np.interp(x_eval[0], yk, ck))

    def cumulative(x, yk=yk, ck=ck, ref=ref):
        return np.interp(np.asarray(x, dtype=float), yk, ck) - ref

    mu = Measure(xs=out_grid, ac_density=np.maximum(dens, 0.0), atoms=tuple(atoms), period=period,
                 cumulative=cumulative)
    return EulerianState(xs=out_grid, u=u, mu=mu, r=lstate.r)


def inverse_consistency(state, lstate):
    """Max violation of ``y + mu([0,y)) <= xi <= y + mu([0,y])`` over labels."""
    if state.periodic:
        xs, cum, atoms = _periodic_nodes(state, float(np.min(lstate.y)), float(np.max(lstate.y)))
    else:
        xs, cum, atoms = _node_cumulative(state)
    if state.mu.cumulative is not None and not atoms:
        F0 = float(state.mu.cumulative(np.array([0.0]))[0])
        c = state.mu.cumulative(lstate.y) - F0
    else:
        c = np.interp(lstate.y, xs, cum)
    lo = lstate.y + c + _atom_mass_below(lstate.y, atoms)
    hi = lstate.y + c + _atom_mass_below(lstate.y, atoms, inclusive=True)
    return float(max(np.max(lo - lstate.xis), np.max(lstate.xis - hi), 0.0))
