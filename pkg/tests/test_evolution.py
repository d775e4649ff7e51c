import math

import numpy as np
import pytest

from chwaves.errors import BlowUp, CflViolation, NonMonotonicY, OffPlateau
from chwaves.evolution import (SimConfig, cfl_dt, compute_pq, h_rate, h_rate_shifted, plateau_deviation,
                               plateau_limit_check, plateau_taylor_check, q_time_derivative,
                               q_time_derivative_all, q_time_derivative_fd, qt_closed_form_plateau,
                               qt_plateau_line_value, rhs, rk4_step, simulate, stumpon_gaps)
from chwaves.helmholtz import p_closed_form_at, state_from_profile
from chwaves.lagrangian import LagrangianState, to_lagrangian
from chwaves.profiles import build_profile, derive_params, stumpon_mass_for_speed


def _constant(c, L=2.0, n=64):
    # u = c on a period 2L, energy density c^2
    E = L * c * c
    xis = -(L + E) + 2 * (L + E) * np.arange(n) / n
    y = xis / (1 + c * c)
    return LagrangianState(xis=xis, y=y, U=np.full(n, c), H=xis - y, L=L, E=E,
                           label_period=2 * (L + E))


def test_zero_state_is_stationary():
    ls = _constant(0.0)
    ev = rhs(ls)
    for f in (ev.P, ev.Q, ev.dy, ev.dU, ev.dH):
        assert np.max(np.abs(f)) == 0.0


def test_constant_state_translates():
    c = 0.8
    ls = _constant(c)
    ev = rhs(ls)
    assert np.ptp(ev.P) < 1e-12 and np.max(np.abs(ev.Q)) < 1e-12
    # trapezoidal cells: P = c^2 up to O(h^2)
    e64, e128 = abs(ev.P[0] - c * c), abs(compute_pq(_constant(c, n=128))[0][0] - c * c)
    assert e64 < 1e-3 and e64 / e128 == pytest.approx(4.0, rel=1e-2)
    out = ls
    for _ in range(20):
        out = rk4_step(out, 0.01)
    assert np.allclose(out.U, c, atol=1e-12)
    assert np.allclose(out.y, ls.y + 0.2 * c, atol=1e-12)
    # H_t = -c^3 is uniform, so H_xi is unchanged
    assert np.allclose(np.diff(out.H), np.diff(ls.H), atol=1e-12)


def test_h_rate_forms_agree():
    rng = np.random.default_rng(0)
    U, P = rng.normal(size=50), rng.normal(size=50)
    for r in (0.0, -0.4, 1.3):
        assert np.allclose(h_rate(U, P, r), h_rate_shifted(U, P, r), atol=1e-12)


def test_cuspon_pq(cuspon_profile):
    ls = to_lagrangian(state_from_profile(cuspon_profile, 2048), 256)
    P, Q = compute_pq(ls)
    assert np.max(np.abs(P - p_closed_form_at(cuspon_profile.params, ls.U))) < 1e-4
    n = ls.n
    k = np.arange(1, n // 2)
    assert np.max(np.abs(P[n // 2 - k] - P[n // 2 + k])) < 1e-13
    assert np.max(np.abs(Q[n // 2 - k] + Q[n // 2 + k])) < 1e-13
    # the crest label moves with speed s
    assert rhs(ls).dy[n // 2] == pytest.approx(cuspon_profile.params.s, abs=1e-9)


def test_stumpon_plateau_rhs(stumpon_lag512, stumpon_params):
    ls = stumpon_lag512
    ev = rhs(ls)
    a, b = (1 + stumpon_params.s ** 2) * stumpon_params.ell * np.array([-0.9, 0.9])
    on = (ls.xis > a) & (ls.xis < b)
    assert np.max(np.abs(ev.dU[on])) < 1e-4
    assert np.allclose(ev.dH[on], -1.0, atol=2e-4)


def test_cusp_qt(cuspon_lag512):
    # Q_t at the crest is (M - s)(s - m)(s - z) / 2 = 1/2 for the golden parameters
    assert q_time_derivative(cuspon_lag512, 0.0) == pytest.approx(0.5, abs=2e-5)


def test_decay_cuspon_qt():
    p = derive_params(2.0, -0.5, 1.0, 0.0, "cuspon-decay")
    ls = to_lagrangian(state_from_profile(build_profile(p), 4096), 512)
    # crest value (M - s)(s - m)^2 / 2 = 9/8
    assert q_time_derivative(ls, 0.0) == pytest.approx(1.125, abs=1e-3)


def test_qt_against_time_difference(cuspon_profile):
    ls = to_lagrangian(state_from_profile(cuspon_profile, 2048), 256)
    qt = q_time_derivative_all(ls)
    fd1, fd2 = q_time_derivative_fd(ls, 1e-3), q_time_derivative_fd(ls, 5e-4)
    assert np.max(np.abs(fd1 - fd2)) < 5e-7
    assert np.max(np.abs(qt - fd2)) < 5e-5


def test_qt_periodic_label_wrap(cuspon_lag512):
    ls = cuspon_lag512
    assert q_time_derivative(ls, 0.3) == pytest.approx(q_time_derivative(ls, 0.3 + ls.label_period), abs=1e-14)


def test_cfl_violation(cuspon_lag512):
    bound = cfl_dt(cuspon_lag512, 0.3)
    with pytest.raises(CflViolation):
        simulate(cuspon_lag512, SimConfig(dt=2 * bound, T=0.1))
    with pytest.raises(CflViolation):
        simulate(cuspon_lag512, SimConfig(dt=-1.0, T=0.1))


def test_blow_up_reported():
    ls = _constant(0.5)
    H = ls.H.copy()
    H[3] = np.nan
    with pytest.raises(BlowUp):
        simulate(ls.with_values(ls.y, ls.U, H, 0.0), SimConfig(dt=0.01, T=0.05))


def test_non_monotone_rejected():
    ls = _constant(0.5)
    y = ls.y.copy()
    y[5], y[6] = y[6], y[5]
    with pytest.raises(NonMonotonicY):
        compute_pq(ls.with_values(y, ls.U, ls.H, 0.0))


def test_simulate_hits_requested_times(stumpon_run):
    ts = stumpon_run.times
    for k in range(1, 21):
        assert np.min(np.abs(ts - 0.01 * k)) < 1e-12
    assert ts[-1] == pytest.approx(0.2, abs=1e-14)


def test_plateau_closed_form_errors(cuspon_lag512, cuspon_params, stumpon_lag512, stumpon_params):
    with pytest.raises(OffPlateau):
        qt_closed_form_plateau(cuspon_params, cuspon_lag512, 0.0)
    with pytest.raises(OffPlateau):
        qt_closed_form_plateau(stumpon_params, stumpon_lag512, 1.9)


def test_plateau_value_at_center(stumpon_lag512, stumpon_params):
    ls = stumpon_lag512
    Lphi = ls.L - stumpon_params.ell
    ref = math.sinh(Lphi) / (2 * math.sinh(Lphi + stumpon_params.ell)) * stumpon_params.jump_product
    assert qt_closed_form_plateau(stumpon_params, ls, 0.0) == pytest.approx(ref, rel=1e-14)
    # cosh growth across the plateau
    y = 0.2
    xi = y * (1 + stumpon_params.s ** 2)
    assert qt_closed_form_plateau(stumpon_params, ls, xi) == pytest.approx(ref * math.cosh(y), rel=1e-6)


def test_plateau_taylor(stumpon_run, stumpon_params):
    rep = plateau_taylor_check(stumpon_run, stumpon_params)
    assert rep.C < 1e-2
    assert plateau_deviation(stumpon_run.final, stumpon_params) > 0


def test_downward_stumpon_ascends():
    M = stumpon_mass_for_speed(0.0, 1.0)
    p = derive_params(M, 0.0, 1.0, 0.3, "stumpon-periodic").reflect()
    p = derive_params(p.M, p.m, p.s, p.ell, p.family)
    pr = build_profile(p)
    ls = to_lagrangian(state_from_profile(pr, 2048), 256)
    out = simulate(ls, SimConfig(dt=cfl_dt(ls, 0.3), T=0.05, n_labels=256)).final
    # the reflected plateau sits at -1 and its center label rises
    assert out.U[ls.n // 2] > -1.0 + 1e-5


def test_stumpon_gaps():
    assert stumpon_gaps(0.0, -1.0) == pytest.approx((2.0, 4.0))
    for gap in (1e-3, 0.1, 1.0):
        Ms, sm = stumpon_gaps(gap, -1.0)
        p = derive_params(-1.0 + sm + Ms, -1.0, -1.0 + sm, 0.5, "stumpon-periodic")
        assert p.z == pytest.approx(-1.0 - gap, abs=1e-12)
        assert p.a == pytest.approx(p.s ** 2, rel=1e-12)


def test_plateau_limit_check():
    rows = plateau_limit_check()
    rel = [r["rel"] for r in rows]
    assert rel[0] > rel[1] > rel[2]
    assert rel[2] < 1e-8
    line = derive_params(5.0, -1.0, 3.0, 0.5, "stumpon-decay")
    assert rows[0]["line"] == pytest.approx(qt_plateau_line_value(line), rel=1e-14)


def _labeling_gap(profile, n, T=1.0):
    from chwaves.lagrangian import identity_labeling, to_eulerian
    a = identity_labeling(state_from_profile(profile, n))
    b = to_lagrangian(state_from_profile(profile, 2048), n)
    ra = simulate(a, SimConfig(dt=cfl_dt(a, 0.3), T=T, n_labels=n)).final
    rb = simulate(b, SimConfig(dt=cfl_dt(b, 0.3), T=T, n_labels=n)).final
    g = np.linspace(-0.5, 1.5, 801)
    return np.max(np.abs(to_eulerian(ra, g).u - to_eulerian(rb, g).u))


def test_labelings_give_the_same_solution(peakon_profile):
    # Eulerian images of the two labelings converge to each other at second order
    g1, g2 = _labeling_gap(peakon_profile, 128), _labeling_gap(peakon_profile, 256)
    assert g1 < 3e-5 and g1 / g2 > 3.5
