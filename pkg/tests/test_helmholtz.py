import math

import numpy as np
import pytest

from chwaves.errors import DomainMismatch
from chwaves.helmholtz import (EulerianState, Measure, helmholtz_defect, kernel_sums, kernel_sums_auto,
                               kernel_sums_direct, p_closed_form, p_closed_form_at, p_convolution,
                               state_from_profile, verify_prop_p)
from chwaves.profiles import build_profile, derive_params


def test_kernel_sums_match_direct():
    rng = np.random.default_rng(1)
    x = np.sort(rng.uniform(-2, 2, 700))
    c = rng.normal(size=700)
    for L in (None, 2.0, 7.5):
        for f, s in zip(kernel_sums(x, c, L), kernel_sums_direct(x, c, L)):
            assert np.max(np.abs(f - s)) <= 1e-12 * np.max(np.abs(s))


def test_sign_zero_convention():
    # coincident abscissae: the odd sum only sees neighbours through the index order
    x = np.zeros(3)
    even, odd = kernel_sums_direct(x, np.ones(3))
    assert np.allclose(even, 3.0) and np.allclose(odd, [-2.0, 0.0, 2.0])


def test_auto_tolerates_small_crossings():
    x = np.linspace(0, 1, 200)
    x[100] = x[99] - 1e-9
    c = np.ones_like(x)
    even, odd, fast = kernel_sums_auto(x, c, 1.0, tol=1e-8)
    assert fast
    e2, o2 = kernel_sums_direct(x, c, 1.0)
    assert np.max(np.abs(even - e2)) < 1e-7 and np.max(np.abs(odd - o2)) < 1e-7
    *_, fast = kernel_sums_auto(x, c, 1.0, tol=0.0)
    assert not fast


def _constant_state(c, period=None, n=256):
    if period is None:
        xs = np.linspace(-40, 40, n + 1)
    else:
        xs = -0.5 * period + period * np.arange(n) / n
    mu = Measure(xs=xs, ac_density=np.full(xs.size, c * c), period=period)
    return EulerianState(xs=xs, u=np.full(xs.size, c), mu=mu, r=0.0)


@pytest.mark.parametrize("period", [None, 3.0])
def test_constant_state_P(period):
    # (1 - d_xx) P = u^2 + u_x^2 / 2 = c^2 for constant u = c
    P = p_convolution(_constant_state(0.7, period, n=4000))
    inner = slice(None) if period else slice(1000, 3001)
    assert np.allclose(P[inner], 0.49, rtol=1e-3)


def test_atom_line():
    xs = np.linspace(-10, 10, 2001)
    mu = Measure(xs=xs, ac_density=np.zeros_like(xs), atoms=((0.0, 2.0),))
    st = EulerianState(xs=xs, u=np.zeros_like(xs), mu=mu)
    assert np.allclose(p_convolution(st), 0.5 * np.exp(-np.abs(xs)), atol=1e-14)


def test_domain_mismatch():
    with pytest.raises(DomainMismatch):
        p_convolution(_constant_state(1.0, 3.0), kernel="line")
    with pytest.raises(DomainMismatch):
        p_convolution(_constant_state(1.0, None), kernel="periodic")


def test_measure_validation():
    with pytest.raises(ValueError):
        Measure(xs=np.arange(3.0), ac_density=np.array([1.0, -1.0, 1.0]))
    with pytest.raises(ValueError):
        Measure(xs=np.arange(3.0), ac_density=np.ones(3), atoms=((0.0, -1.0),))


def test_peakon_explicit_formula():
    p = derive_params(1.0, 0.0, 1.0, 0.0, "peakon-decay")
    x = np.linspace(-5, 5, 41)
    u = np.exp(-np.abs(x))
    assert np.allclose(p_closed_form_at(p, u), 0.5 * (1 - (1 - u) ** 2), atol=1e-15)


def test_stumpon_plateau_P(stumpon_profile):
    st = state_from_profile(stumpon_profile, 2048)
    on = np.abs(st.xs) < stumpon_profile.params.ell - 0.05
    P = p_convolution(st)
    assert np.max(np.abs(P[on] - 1.0)) < 1e-4


def test_cuspon_convergence(cuspon_profile):
    rep = verify_prop_p(cuspon_profile.params, cuspon_profile, grid_sizes=(256, 512, 1024))
    assert all(np.diff(rep.errors) < 0) and rep.order > 1.0


def test_verify_prop_p_flags_low_order(cuspon_profile):
    with pytest.raises(AssertionError):
        verify_prop_p(cuspon_profile.params, cuspon_profile, grid_sizes=(256, 512), min_order=3.0)


def test_closed_form_is_a_helmholtz_solution(cuspon_profile):
    # away from the cusp P - P_xx = u^2 + u_x^2 / 2
    xs = np.linspace(-1.4, -0.3, 2001)
    u, ux = cuspon_profile.evaluate(xs)
    P = p_closed_form_at(cuspon_profile.params, u)
    assert np.max(np.abs(helmholtz_defect(xs, u, ux, P))) < 1e-4


def test_closed_form_samples(cuspon_profile):
    assert np.allclose(p_closed_form(cuspon_profile.params, cuspon_profile),
                       p_closed_form_at(cuspon_profile.params, cuspon_profile.vals))


def test_decay_cuspon_P():
    p = derive_params(2.0, -0.5, 1.0, 0.0, "cuspon-decay")
    pr = build_profile(p)
    st = state_from_profile(pr, 4096)
    err = np.max(np.abs(p_convolution(st) - p_closed_form_at(p, st.u)))
    assert err < 1e-2
    assert math.isclose(st.r, p.m)
