"""Small quadrature toolkit: Gauss-Legendre (fixed and doubling) and adaptive Simpson."""
from functools import lru_cache

import numpy as np

from .errors import QuadratureNonconvergent


@lru_cache(maxsize=64)
def gauss_nodes(n):
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(f, a, b, n=20):
    """Fixed ``n``-point rule on [a, b]. ``f`` must accept arrays."""
    x, w = gauss_nodes(n)
    half = 0.5 * (b - a)
    return half * np.dot(w, f(0.5 * (a + b) + half * x))


def composite_gauss(f, edges, n=12):
    """Sum of ``n``-point rules over consecutive ``edges``; returns per-panel integrals."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_nodes(n)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    pts = 0.5 * (a + b)[:, None] + half[:, None] * x[None, :]
    return half * (f(pts) @ w)


def gauss_doubling(f, a, b, tol, n0=8, max_panels=1 << 14, order=12):
    """Composite Gauss-Legendre on 1, 2, 4, ... panels until successive totals agree.

    Returns ``(value, error_estimate)``; raises :class:`QuadratureNonconvergent`
    when ``max_panels`` is reached without meeting ``tol``.
    """
    panels = max(1, n0 // order)
    prev = composite_gauss(f, np.linspace(a, b, panels + 1), order).sum()
    while panels < max_panels:
        panels *= 2
        cur = composite_gauss(f, np.linspace(a, b, panels + 1), order).sum()
        err = abs(cur - prev)
        if err <= tol:
            return cur, err
        prev = cur
    raise QuadratureNonconvergent(
        f"Gauss-Legendre refinement stalled at {err:.3e} > {tol:.1e} with {panels} panels")


def adaptive_simpson(f, a, b, tol=1e-10, max_depth=50):
    """Classical recursive adaptive Simpson with Richardson correction.

    ``f`` is called on scalars. Independent of the Gauss-Legendre path, so the two
    are used as a cross-check on each other.
    """
    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if depth >= max_depth:
            raise QuadratureNonconvergent(f"adaptive Simpson hit depth {max_depth} on [{a}, {b}]")
        if abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return (recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
                + recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1))

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 0)
