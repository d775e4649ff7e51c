"""Traveling-wave profiles of the (kappa = 0) Camassa-Holm equation.

A bounded traveling wave ``u(t, x) = phi(x - s t)`` is classified by its maximum
``M``, minimum (or asymptotic level) ``m`` and speed ``s``; away from the set where
``phi = s`` it satisfies::

    (phi')**2 * (s - phi) = (M - phi) * (phi - m) * (phi - z),   z = s - M - m.

This module builds peakons, cuspons and stumpons from that classification.
Cuspons have no closed form: we parametrize the half profile by

    phi = m + (s - m) sin(theta)**2,     theta in [0, pi/2],

which removes the square-root singularities at both ends of ``[m, s]``, and near
the trough switch to a second variable (``sin theta = eps sinh v`` for periodic
waves, ``tan(theta/2) = e**u`` for decaying ones) so the distance-to-cusp
integrand stays smooth even when the period is very long.

Only the orderings with ``s > m`` (and ``s > 0`` for decaying peakons) are built
directly; the mirrored families are produced by the reflection ``u -> -u``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NonMonotonic, OrderingViolation, QuadratureNonconvergent, StumponInadmissible
from .quadrature import composite_gauss, gauss_doubling, gauss_nodes

FAMILIES = (
    "peakon-decay",
    "peakon-periodic",
    "cuspon-decay",
    "cuspon-periodic",
    "stumpon-decay",
    "stumpon-periodic",
)

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0

# decaying profiles are truncated where phi - m < DECAY_FLOOR * (s - m)
DECAY_FLOOR = 1e-8
# relative |z - m| / (s - m) below which the half-period integral is declared divergent
DIVERGENCE_FLOOR = 1e-14
RESIDUAL_TOL = 1e-6


@dataclass(frozen=True)
class TravelingWaveParams:
    M: float
    m: float
    s: float
    z: float
    a: float
    ell: float
    family: str

    @property
    def kind(self):
        return self.family.split("-")[0]

    @property
    def periodic(self):
        return self.family.endswith("periodic")

    @property
    def reflected(self):
        """True for the mirrored orderings (primed cases)."""
        if self.family == "peakon-decay":
            return self.s < 0
        return self.s < self.m

    def reflect(self):
        """Parameters of ``-phi``: every height and the speed change sign, ``a`` does not."""
        return replace(self, M=-self.M, m=-self.m, s=-self.s, z=-self.z)

    @property
    def jump_product(self):
        """(M - s)(s - m)(s - z): the flux jump across a stumpon gluing line."""
        return (self.M - self.s) * (self.s - self.m) * (self.s - self.z)

    def to_dict(self):
        return {"M": self.M, "m": self.m, "s": self.s, "z": self.z, "a": self.a,
                "ell": self.ell, "family": self.family}

    @classmethod
    def from_dict(cls, d):
        return derive_params(d["M"], d["m"], d["s"], d.get("ell", 0.0), d["family"])


def _a_terms(M, m, s):
    # a = -Mm - (M+m)(s-M-m) expanded, so fsum can cancel exactly where it should
    return [-M * m, -M * s, -m * s, M * M, 2.0 * M * m, m * m]


def derive_params(M, m, s, ell=0.0, family_hint="cuspon-periodic"):
    """Compute ``z`` and ``a`` and validate the family orderings.

    Stumpon families need ``a = s**2``; the comparison is done on the expanded
    polynomial with compensated summation, so only genuine rounding of the inputs
    can leave a residue (tolerance: 16 ulp of the term magnitudes).
    """
    family = family_hint
    M, m, s, ell = float(M), float(m), float(s), float(ell)
    if not all(math.isfinite(v) for v in (M, m, s, ell)):
        raise OrderingViolation("parameters must be finite")
    if family not in FAMILIES:
        raise OrderingViolation(f"unknown family {family!r}; expected one of {FAMILIES}")
    scale = max(1.0, abs(M), abs(m), abs(s))
    tol = 1e-12 * scale
    z = s - M - m
    terms = _a_terms(M, m, s)
    a = math.fsum(terms)
    kind, geometry = family.split("-")

    if ell < 0:
        raise OrderingViolation("ell must be non-negative")
    if kind != "stumpon" and ell != 0.0:
        raise OrderingViolation(f"{family} has no plateau; ell must be 0")

    if family == "peakon-decay":
        if abs(m) > tol or abs(s - M) > tol or s == 0.0:
            raise OrderingViolation("peakon with decay needs m = z = 0 and s = M != 0")
        m, z, M = 0.0, 0.0, s
        a = 0.0
    elif family == "peakon-periodic":
        if abs(s - M) > tol:
            raise OrderingViolation("periodic peakon needs s = M")
        M = s
        z = -m
        if not (0 < m < s or s < m < 0):
            raise OrderingViolation("periodic peakon needs 0 < m < s or s < m < 0")
        a = math.fsum(_a_terms(M, m, s))
    else:
        if geometry == "decay":
            if abs(z - m) > tol:
                raise OrderingViolation(f"{family} needs z = m (i.e. 2m = s - M); got z - m = {z - m:.3e}")
            z = m
            ok = m < s < M or M < s < m
        else:
            ok = z < m < s < M or M < s < m < z
        if not ok:
            raise OrderingViolation(
                f"{family} orderings violated: z={z:.6g}, m={m:.6g}, s={s:.6g}, M={M:.6g}")
        if kind == "stumpon":
            if ell <= 0:
                raise StumponInadmissible("a stumpon needs a plateau half-width ell > 0")
            gap = math.fsum(terms + [-s * s])
            gap_tol = 16 * np.finfo(float).eps * math.fsum(abs(t) for t in terms + [s * s])
            if abs(gap) > gap_tol:
                raise StumponInadmissible(f"stumpons need a = s^2; a - s^2 = {gap:.3e}")
    return TravelingWaveParams(M=M, m=m, s=s, z=z, a=a, ell=ell, family=family)


def stumpon_mass_for_speed(m, s):
    """The ``M`` that makes ``a = s**2`` for given ``m < s`` (larger root of the quadratic)."""
    # M**2 + (m - s) M + (m**2 - m s - s**2) = 0
    b, c = m - s, m * m - m * s - s * s
    return 0.5 * (-b + math.sqrt(b * b - 4.0 * c))


# ----------------------------------------------------------------------------------------
# half-profile shapes: functions of w = |x - center| >= 0


class _PeakonDecayHalf:
    def __init__(self, s):
        self.s = s
        self.half_period = math.inf

    def value(self, w):
        return self.s * np.exp(-w)

    def slope(self, w):
        return -self.s * np.exp(-w)

    def prim(self, w, r):
        s = self.s
        return s * s * -np.expm1(-2 * w) - 2 * r * s * -np.expm1(-w) + r * r * w


class _PeakonPeriodicHalf:
    def __init__(self, s, L):
        self.s, self.half_period = s, L
        self.amp = s / math.cosh(L)

    def value(self, w):
        return self.amp * np.cosh(w)

    def slope(self, w):
        return self.amp * np.sinh(w)

    def prim(self, w, r):
        A = self.amp
        return 0.5 * A * A * np.sinh(2 * w) - 2 * r * A * np.sinh(w) + r * r * w


class _CusponHalf:
    """Half cuspon on w in [0, L]; cusp at w = 0, trough (or tail) at w = L."""

    ORDER = 12

    def __init__(self, params, n_nodes=1024):
        M, m, s, z = params.M, params.m, params.s, params.z
        self.M, self.m, self.s, self.z = M, m, s, z
        self.sm = s - m
        self.decay = not params.periodic
        self.mz = 0.0 if self.decay else m - z
        if not self.decay and self.mz < DIVERGENCE_FLOOR * self.sm:
            raise QuadratureNonconvergent(
                f"half-period integral diverges as z -> m (|z - m| = {self.mz:.3e})")
        self.eps = math.sqrt(self.mz / self.sm)
        self.theta_lo = math.asin(math.sqrt(DECAY_FLOOR)) if self.decay else 0.0
        self._build(max(int(n_nodes), 32))
        # exponential tail beyond the truncation point for decaying cuspons
        self.kappa = math.sqrt((M - m) / self.sm)

    # -- variable changes --------------------------------------------------------------
    # region A: theta in [theta_lo, pi/4] (trough side), region B: [pi/4, pi/2] (cusp side)
    def _to_var(self, th):
        th = np.asarray(th, dtype=float)
        if self.decay:
            return np.log(np.tan(0.5 * th))
        return np.arcsinh(np.sin(th) / self.eps)

    def _from_var(self, v):
        if self.decay:
            return 2.0 * np.arctan(np.exp(v))
        return np.arcsin(np.minimum(self.eps * np.sinh(v), 1.0))

    def _integrands_A(self, v):
        """(dx, phi dx, phi^2 dx, phi_x^2 dx) per unit of the region-A variable."""
        th = self._from_var(v)
        sn, cs = np.sin(th), np.cos(th)
        y = self.m + self.sm * sn * sn
        My = (self.M - self.s) + self.sm * cs * cs
        if self.decay:
            g = 2.0 * math.sqrt(self.sm) * cs * cs / np.sqrt(My)
            h = 2.0 * self.sm ** 1.5 * sn ** 4 * np.sqrt(My)
        else:
            chv = np.cosh(v)
            g = 2.0 * math.sqrt(self.sm) * cs / np.sqrt(My)
            jac = self.eps * chv / cs
            h = 2.0 * self.sm * sn * sn * np.sqrt(My) * math.sqrt(self.mz) * chv * jac
        return g, g * y, g * y * y, h

    def _integrands_B(self, th):
        sn, cs = np.sin(th), np.cos(th)
        y = self.m + self.sm * sn * sn
        My = (self.M - self.s) + self.sm * cs * cs
        yz = self.mz + self.sm * sn * sn
        g = 2.0 * self.sm * cs * cs / (np.sqrt(My) * np.sqrt(yz))
        h = 2.0 * self.sm * sn * sn * np.sqrt(My) * np.sqrt(yz)
        return g, g * y, g * y * y, h

    def _panel_integrals(self, ta, tb):
        """Four integrals over [ta, tb] (elementwise, each panel inside one region)."""
        ta, tb = np.atleast_1d(ta).astype(float), np.atleast_1d(tb).astype(float)
        out = np.empty((4, ta.size))
        x, w = gauss_nodes(self.ORDER)
        inA = tb <= 0.25 * math.pi + 1e-15
        for mask, region in ((inA, "A"), (~inA, "B")):
            if not mask.any():
                continue
            a, b = ta[mask], tb[mask]
            if region == "A":
                a, b = self._to_var(a), self._to_var(b)
            half = 0.5 * (b - a)
            pts = 0.5 * (a + b)[:, None] + half[:, None] * x[None, :]
            vals = self._integrands_A(pts) if region == "A" else self._integrands_B(pts)
            for k in range(4):
                out[k, mask] = half * (vals[k] @ w)
        return out

    def _build(self, n_nodes):
        qa = 0.25 * math.pi
        va, vq = float(self._to_var(self.theta_lo)) if self.decay else 0.0, float(self._to_var(qa))
        # pilot pass to split the nodes roughly by x-length
        pilot = self._nodes(va, vq, 64, 64)
        I = self._panel_integrals(pilot[:-1], pilot[1:])[0]
        xB = I[pilot[1:] > qa + 1e-15].sum()
        frac = min(max(xB / I.sum(), 0.25), 0.75)
        nB = max(16, int(round(n_nodes * frac)))
        nA = max(16, n_nodes - nB)
        th = self._nodes(va, vq, nA, nB)
        I = self._panel_integrals(th[:-1], th[1:])
        cum = np.zeros((4, th.size))
        cum[:, :-1] = np.cumsum(I[:, ::-1], axis=1)[:, ::-1]
        self.theta = th
        self.cum = cum  # integrals from node k to the cusp
        self.x_nodes = cum[0]
        if np.any(np.diff(self.x_nodes) >= 0):
            raise NonMonotonic("distance-to-cusp table is not strictly decreasing")
        self.x_max = float(cum[0, 0])
        self.half_period = math.inf if self.decay else self.x_max

    def _nodes(self, va, vq, nA, nB):
        A = self._from_var(np.linspace(va, vq, nA + 1))
        A[0], A[-1] = self.theta_lo, 0.25 * math.pi
        B = np.linspace(0.25 * math.pi, 0.5 * math.pi, nB + 1)
        return np.concatenate([A, B[1:]])

    # -- evaluation ----------------------------------------------------------------
    def phi_of_theta(self, th):
        return self.m + self.sm * np.sin(th) ** 2

    def slope_of_theta(self, th):
        sn, cs = np.sin(th), np.cos(th)
        My = (self.M - self.s) + self.sm * cs * cs
        yz = self.mz + self.sm * sn * sn
        with np.errstate(divide="ignore"):
            return -(sn / cs) * np.sqrt(My) * np.sqrt(yz)

    def theta_of_w(self, w, iters=60):
        """Invert w = x(theta) on the truncated range [0, x_max] by bisection."""
        w = np.asarray(w, dtype=float)
        xs = self.x_nodes[::-1]  # ascending, xs[0] = 0 at the cusp
        j = np.clip(np.searchsorted(xs, w, side="right") - 1, 0, xs.size - 2)
        k = self.theta.size - 1 - j  # theta[k] is the node at distance xs[j]
        lo, hi = self.theta[k - 1].copy(), self.theta[k].copy()
        x_hi = self.x_nodes[k]
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            x_mid = x_hi + self._panel_integrals(mid, hi)[0]
            go_up = x_mid > w  # too far from the cusp: move theta up
            lo = np.where(go_up, mid, lo)
            hi_new = np.where(go_up, hi, mid)
            x_hi = np.where(go_up, x_hi, x_mid)
            hi = hi_new
        return 0.5 * (lo + hi)

    def _cum_at(self, th):
        """All four integrals from theta to the cusp."""
        th = np.asarray(th, dtype=float)
        k = np.clip(np.searchsorted(self.theta, th, side="right"), 1, self.theta.size - 1)
        part = self._panel_integrals(th, self.theta[k])
        return self.cum[:, k] + part

    def _prim_from_cum(self, c, r):
        return c[2] - 2.0 * r * c[1] + r * r * c[0] + c[3]

    def value(self, w):
        w = np.asarray(w, dtype=float)
        out = np.empty_like(w)
        inside = w <= self.x_max
        out[inside] = self.phi_of_theta(self.theta_of_w(w[inside]))
        if (~inside).any():
            phi_x = self.phi_of_theta(self.theta_lo)
            out[~inside] = self.m + (phi_x - self.m) * np.exp(-self.kappa * (w[~inside] - self.x_max))
        return out

    def slope(self, w):
        w = np.asarray(w, dtype=float)
        out = np.empty_like(w)
        inside = w <= self.x_max
        out[inside] = self.slope_of_theta(self.theta_of_w(w[inside]))
        out[w == 0] = -np.inf
        if (~inside).any():
            out[~inside] = -self.kappa * (self.value(w[~inside]) - self.m)
        return out

    def prim(self, w, r):
        w = np.asarray(w, dtype=float)
        out = np.empty_like(w)
        inside = w <= self.x_max
        total = self._prim_from_cum(self.cum[:, 0], r)
        th = self.theta_of_w(w[inside])
        out[inside] = self._prim_from_cum(self._cum_at(th), r)
        if (~inside).any():
            dphi = self.phi_of_theta(self.theta_lo) - self.m
            dw = w[~inside] - self.x_max
            k, c = self.kappa, self.m - r
            out[~inside] = (total + c * c * dw + 2 * c * dphi / k * -np.expm1(-k * dw)
                            + (1 + k * k) * dphi * dphi / (2 * k) * -np.expm1(-2 * k * dw))
        return out

    def table(self):
        """Node samples (w ascending from the cusp): w, phi, phi_x."""
        th = self.theta[::-1]
        return self.x_nodes[::-1].copy(), self.phi_of_theta(th), self.slope_of_theta(th)


class _StumponHalf:
    def __init__(self, cusp_half, s, ell):
        self.cusp, self.s, self.ell = cusp_half, s, ell
        self.half_period = cusp_half.half_period + ell

    def value(self, w):
        w = np.asarray(w, dtype=float)
        out = np.full_like(w, self.s)
        side = w >= self.ell
        if side.any():
            out[side] = self.cusp.value(w[side] - self.ell)
        return out

    def slope(self, w):
        w = np.asarray(w, dtype=float)
        out = np.zeros_like(w)
        side = w >= self.ell
        if side.any():
            out[side] = self.cusp.slope(w[side] - self.ell)
        return out

    def prim(self, w, r):
        w = np.asarray(w, dtype=float)
        plate = (self.s - r) ** 2
        out = plate * np.minimum(w, self.ell)
        side = w > self.ell
        if side.any():
            out[side] += self.cusp.prim(w[side] - self.ell, r)
        return out


class _Reflected:
    def __init__(self, half):
        self.half, self.half_period = half, half.half_period

    def value(self, w):
        return -self.half.value(w)

    def slope(self, w):
        return -self.half.slope(w)

    def prim(self, w, r):
        return self.half.prim(w, -r)


class Shape:
    """Full profile on the line: even extension of a half shape, periodic if needed."""

    def __init__(self, half, center=0.0):
        self.half, self.center = half, float(center)
        self.half_period = half.half_period
        self.periodic = math.isfinite(self.half_period)

    def _reduce(self, x):
        w = np.asarray(x, dtype=float) - self.center
        k = np.zeros_like(w)
        if self.periodic:
            H = self.half_period
            k = np.floor((w + H) / (2 * H))
            w = w - 2 * H * k
        return w, k

    def value(self, x):
        w, _ = self._reduce(x)
        return self.half.value(np.abs(w))

    def slope(self, x):
        w, _ = self._reduce(x)
        d = self.half.slope(np.abs(w))
        return np.where(w < 0, -d, d)

    def prim(self, x, r):
        """Signed energy mass mu([center, x)) for density (u - r)^2 + u_x^2."""
        w, k = self._reduce(x)
        p = self.half.prim(np.abs(w), r)
        p = np.where(w < 0, -p, p)
        if self.periodic:
            p = p + k * self.period_mass(r)
        return p

    def period_mass(self, r):
        return 2.0 * float(self.half.prim(np.array([self.half_period]), r)[0])


# ----------------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProfileTable:
    """Sampled wave profile plus the exact evaluator it was sampled from."""

    xs: np.ndarray
    vals: np.ndarray
    derivs: np.ndarray
    half_period: float
    singular_points: tuple
    params: TravelingWaveParams
    center: float = 0.0
    shape: Shape = field(default=None, repr=False)

    @property
    def periodic(self):
        return math.isfinite(self.half_period)

    @property
    def period(self):
        return 2.0 * self.half_period

    @property
    def singular_mask(self):
        mask = ~np.isfinite(self.derivs)
        for p in self.singular_points:
            mask |= np.isclose(self.xs, p, rtol=0, atol=1e-14 * max(1.0, abs(p)))
        return mask

    @property
    def plateau_mask(self):
        if self.params.kind != "stumpon" or self.params.ell == 0:
            return np.zeros(self.xs.shape, dtype=bool)
        w, _ = self.shape._reduce(self.xs)
        return np.abs(w) < self.params.ell

    def evaluate(self, x):
        """Exact ``(u, u_x)`` at arbitrary abscissae."""
        x = np.asarray(x, dtype=float)
        return self.shape.value(x), self.shape.slope(x)

    def energy_primitive(self, x, r):
        return self.shape.prim(np.asarray(x, dtype=float), r)

    def with_samples(self, xs):
        """Same profile resampled on ``xs`` (exact values)."""
        xs = np.asarray(xs, dtype=float)
        u, ux = self.evaluate(xs)
        return replace(self, xs=xs, vals=u, derivs=ux)


def _make_shape(params, n_nodes=1024, center=0.0):
    p = params.reflect() if params.reflected else params
    if p.kind == "peakon":
        half = _PeakonDecayHalf(p.s) if p.family == "peakon-decay" else _PeakonPeriodicHalf(
            p.s, peakon_half_period(p))
    else:
        half = _CusponHalf(p, n_nodes)
        if p.kind == "stumpon" and p.ell > 0:
            half = _StumponHalf(half, p.s, p.ell)
    if params.reflected:
        half = _Reflected(half)
    return Shape(half, center)


def peakon_half_period(params):
    s, m = params.s, params.m
    return 2.0 * math.log((math.sqrt(abs(s - m)) + math.sqrt(abs(s + m))) / math.sqrt(2.0 * abs(m)))


def peakon_profile(params, x0, grid):
    """Decaying ``s e^{-|x-x0|}`` or periodic ``s cosh(x-x0)/cosh L`` sampled on ``grid``.

    For the periodic peakon ``x0`` is a trough and the peaks sit at ``x0 +- L``.
    ``derivs`` at a peak hold the one-sided value from the cell that contains it.
    """
    if params.kind != "peakon":
        raise OrderingViolation(f"peakon_profile got a {params.family}")
    shape = _make_shape(params, center=x0)
    xs = np.asarray(grid, dtype=float)
    u, ux = shape.value(xs), shape.slope(xs)
    return ProfileTable(xs=xs, vals=u, derivs=ux, half_period=shape.half_period,
                        singular_points=(), params=params, center=float(x0), shape=shape)


def half_period_from_gaps(Ms, sm, mz, tol=1e-12):
    """Cuspon half period from the gaps ``M - s``, ``s - m`` and ``m - z`` alone.

    The integral only sees differences of the heights, so passing the gaps keeps
    ``m - z`` exact even when it is far below the resolution of ``z`` itself.
    """
    if not (Ms > 0 and sm > 0 and mz > 0):
        raise QuadratureNonconvergent(f"need positive gaps; got M-s={Ms}, s-m={sm}, m-z={mz}")
    half = _CusponHalf.__new__(_CusponHalf)
    half.m, half.sm, half.mz = 0.0, float(sm), float(mz)
    half.s, half.M, half.z = half.sm, half.sm + float(Ms), -half.mz
    half.decay = False
    half.eps = math.sqrt(half.mz / half.sm)
    vq = float(half._to_var(0.25 * math.pi))
    A, eA = gauss_doubling(lambda v: half._integrands_A(v)[0], 0.0, vq, 0.5 * tol)
    B, eB = gauss_doubling(lambda t: half._integrands_B(t)[0], 0.25 * math.pi, 0.5 * math.pi, 0.5 * tol)
    return A + B


def _half_period_integral(params, tol):
    mz = params.m - params.z
    sm = params.s - params.m
    if mz < DIVERGENCE_FLOOR * sm:
        raise QuadratureNonconvergent(
            f"half-period integral diverges as z -> m (|z - m| = {abs(mz):.3e})")
    return half_period_from_gaps(params.M - params.s, sm, mz, tol)


def cuspon_half_period(params, quad_tol=1e-12):
    """Half period ``L`` of a periodic cuspon (or of the cuspon inside a periodic stumpon).

    ``L = int_m^s sqrt|s-y| / (sqrt|M-y| sqrt|y-m| sqrt|y-z|) dy``; divergent (and
    reported as such) in the decaying limit ``z -> m``.
    """
    if params.kind == "peakon":
        raise OrderingViolation("cuspon_half_period needs a cuspon or stumpon family")
    if not params.periodic:
        raise QuadratureNonconvergent("decaying cuspons have z = m: the half-period integral diverges")
    p = params.reflect() if params.reflected else params
    return _half_period_integral(p, quad_tol)


def half_period_integrand(params):
    """Raw integrand of the half-period integral in ``y`` (for independent cross-checks)."""
    p = params.reflect() if params.reflected else params
    M, m, s, z = p.M, p.m, p.s, p.z
    return lambda y: np.sqrt(np.abs(s - y)) / (np.sqrt(np.abs(M - y)) * np.sqrt(np.abs(y - m)) * np.sqrt(np.abs(y - z)))


def _cusp_exponent(w, phi, s, n_fit=8):
    w, d = np.asarray(w), np.abs(np.asarray(phi) - s)
    ok = (w > 0) & (d > 0)
    w, d = w[ok][:n_fit], d[ok][:n_fit]
    return float(np.polyfit(np.log(w), np.log(d), 1)[0])


def cuspon_profile(params, n_samples=2000):
    """Cuspon centered at its cusp (x = 0) on one period (periodic) or truncated line.

    ``n_samples`` is the approximate total number of samples; the half profile gets
    ``n_samples // 2`` nodes, graded towards the cusp.
    """
    if params.kind != "cuspon":
        raise OrderingViolation(f"cuspon_profile got a {params.family}")
    shape = _make_shape(params, n_nodes=max(n_samples // 2, 32))
    w, phi, dphi = _half_table(shape)
    xs = np.concatenate([-w[:0:-1], w])
    vals = np.concatenate([phi[:0:-1], phi])
    derivs = np.concatenate([-dphi[:0:-1], dphi])
    derivs[w.size - 1] = np.inf
    _check_cusp(w, phi, params)
    half_period = shape.half_period
    return ProfileTable(xs=xs, vals=vals, derivs=derivs, half_period=half_period,
                        singular_points=(0.0,), params=params, center=0.0, shape=shape)


def _half_table(shape):
    half = shape.half
    sign = 1.0
    if isinstance(half, _Reflected):
        half, sign = half.half, -1.0
    if isinstance(half, _StumponHalf):
        half = half.cusp
    w, phi, dphi = half.table()
    return w, sign * phi, sign * dphi


def _check_cusp(w, phi, params):
    expo = _cusp_exponent(w, phi, params.s)
    if abs(expo - 2.0 / 3.0) > 0.05:
        raise QuadratureNonconvergent(f"cusp exponent {expo:.4f} is not 2/3 +- 0.05")
    if np.any(np.diff(w) <= 0):
        raise NonMonotonic("cuspon table abscissae are not strictly increasing")


def stumpon_profile(params, n_samples=2000):
    """Stumpon: plateau ``psi = s`` on ``|x| < ell`` glued to cuspon flanks at ``+-ell``."""
    if params.kind != "stumpon":
        raise OrderingViolation(f"stumpon_profile got a {params.family}")
    if params.ell > 0:
        gap = math.fsum(_a_terms(params.M, params.m, params.s) + [-params.s ** 2])
        if abs(gap) > 1e-12 * max(1.0, params.s ** 2):
            raise StumponInadmissible(f"stumpons need a = s^2; a - s^2 = {gap:.3e}")
    shape = _make_shape(params, n_nodes=max(n_samples // 2, 32))
    w, phi, dphi = _half_table(shape)
    _check_cusp(w, phi, params)
    ell = params.ell
    flank_len = w[-1]
    n_plat = max(4, int(round(n_samples * ell / (ell + flank_len) / 2)))
    plat = np.linspace(0.0, ell, n_plat + 1)[:-1]
    half_x = np.concatenate([plat, w + ell]) if ell > 0 else w
    half_v = np.concatenate([np.full(plat.size, params.s), phi]) if ell > 0 else phi
    half_d = np.concatenate([np.zeros(plat.size), dphi]) if ell > 0 else dphi.copy()
    half_d[plat.size if ell > 0 else 0] = -np.inf if not params.reflected else np.inf
    xs = np.concatenate([-half_x[:0:-1], half_x])
    vals = np.concatenate([half_v[:0:-1], half_v])
    derivs = np.concatenate([-half_d[:0:-1], half_d])
    sing = (-ell, ell) if ell > 0 else (0.0,)
    return ProfileTable(xs=xs, vals=vals, derivs=derivs, half_period=shape.half_period,
                        singular_points=sing, params=params, center=0.0, shape=shape)


def build_profile(params, n_samples=2000, x0=0.0, grid=None):
    """Dispatch on the family. Peakons are sampled on ``grid`` (default: one period)."""
    if params.kind == "peakon":
        if grid is None:
            if params.periodic:
                L = peakon_half_period(params)
                grid = np.linspace(x0 - L, x0 + L, n_samples + 1)
            else:
                grid = np.linspace(x0 - 20.0, x0 + 20.0, n_samples + 1)
        return peakon_profile(params, x0, grid)
    if params.kind == "cuspon":
        return cuspon_profile(params, n_samples)
    return stumpon_profile(params, n_samples)


def profile_residual(profile, derivative="table", exclude=0.05):
    """Max ODE residual ``|(phi')^2 (s-phi) - (M-phi)(phi-m)(phi-z)|`` over regular samples.

    Plateau samples are measured by ``|psi - s| + |psi'|`` instead. With
    ``derivative="finite_difference"`` the slope is re-derived from the samples
    (second-order non-uniform differences), which tests the table itself.
    """
    p = profile.params
    xs, u = profile.xs, profile.vals
    if derivative == "table":
        du = profile.derivs
    else:
        du = np.gradient(u, xs)
    bad = profile.singular_mask
    if derivative != "table":
        # difference stencils are meaningless next to cusps and peaks; skip a fixed
        # neighbourhood so the refinement behaviour of the regular part shows
        bad = bad.copy()
        bad[0] = bad[-1] = True
        for c in _kinks(profile):
            bad |= np.abs(xs - c) < exclude

    plate = profile.plateau_mask
    regular = ~bad & ~plate
    with np.errstate(invalid="ignore"):
        res = np.abs(du[regular] ** 2 * (p.s - u[regular])
                     - (p.M - u[regular]) * (u[regular] - p.m) * (u[regular] - p.z))
    worst = float(res.max()) if res.size else 0.0
    if plate.any():
        worst = max(worst, float(np.max(np.abs(u[plate] - p.s) + np.abs(du[plate]))))
    return worst


def _kinks(profile):
    p = profile.params
    pts = list(profile.singular_points)
    if p.kind == "peakon":
        if p.periodic:
            L = profile.half_period
            pts += [profile.center - L, profile.center + L]
        else:
            pts.append(profile.center)
    return pts


def cusp_exponent(profile, at=None):
    """Fitted exponent ``q`` in ``|phi - s| ~ |x - x_c|^q`` from the samples nearest the cusp."""
    xc = profile.singular_points[-1] if at is None else at
    right = profile.xs > xc
    return _cusp_exponent(profile.xs[right] - xc, profile.vals[right], profile.params.s)
