import json
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from chwaves.analysis import (DiagnosticsReport, characteristics_compare, conservation_jump, energy,
                              edge_asymmetry, energy_drift, lagrangian_energy, peakon_characteristic_exact,
                              peakon_characteristic_y, richardson_limit, trough_label, weak_residual_check)
from chwaves.errors import OrderingViolation, OutOfRange
from chwaves.helmholtz import state_from_profile
from chwaves.profiles import build_profile, derive_params

# frozen from the solve_ivp oracle below
W_10 = -0.4696165073969879


def _offset_ode(params, w0, t):
    # w = x - s t obeys w' = u - s along a characteristic
    s = params.s
    if params.family == "peakon-decay":
        f = lambda _, w: [s * math.exp(-abs(w[0])) - s]  # noqa: E731
    else:
        L = math.acosh(s / params.m)
        f = lambda _, w: [s * math.cosh(w[0]) / math.cosh(L) - s]  # noqa: E731
    sol = solve_ivp(f, (0.0, t), [w0], method="DOP853", rtol=1e-13, atol=1e-14)
    return sol.y[0, -1]


def test_peakon_offset_against_ode(peakon_params):
    ref = _offset_ode(peakon_params, 0.25, 10.0)
    assert ref == pytest.approx(W_10, abs=1e-10)
    assert float(peakon_characteristic_exact(peakon_params, 0.25, 10.0)) == pytest.approx(W_10, abs=1e-13)
    for w0, t in ((-0.3, 1.0), (0.49, 4.0), (0.0, 3.0)):
        assert float(peakon_characteristic_exact(peakon_params, w0, t)) == pytest.approx(
            _offset_ode(peakon_params, w0, t), abs=1e-9)


def test_decay_peakon_offset():
    p = derive_params(1.0, 0.0, 1.0, 0.0, "peakon-decay")
    for w0 in (0.5, -0.5, 2.0):
        assert float(peakon_characteristic_exact(p, w0, 2.0)) == pytest.approx(_offset_ode(p, w0, 2.0), abs=1e-9)


def test_peakon_characteristics_do_not_cross(peakon_params):
    y0 = np.linspace(-2.0, 2.0, 401)
    for t in (0.5, 3.0, 10.0):
        assert np.all(np.diff(peakon_characteristic_y(peakon_params, y0, t, 0.5)) > 0)


def test_peakon_crests_are_fixed_offsets(peakon_params):
    # characteristics through the peaks ride with them
    w = peakon_characteristic_exact(peakon_params, np.array([-0.5, 0.5]), 7.0)
    assert np.allclose(w, [-0.5, 0.5], atol=1e-15)


def test_offset_out_of_range(peakon_params):
    with pytest.raises(OutOfRange):
        peakon_characteristic_exact(peakon_params, 0.6, 1.0)
    with pytest.raises(OrderingViolation):
        peakon_characteristic_exact(derive_params(1.618, 0.0, 1.0), 0.1, 1.0)


def test_trough_label(peakon_run1024):
    ls = peakon_run1024[0]
    k = trough_label(ls, 0.5)
    assert abs(ls.y[k] - 0.5) <= 0.5 * ls.dxi + 1e-15


def test_characteristics_window(peakon_run1024, peakon_params):
    full = characteristics_compare(peakon_run1024, peakon_params, 0.5)
    inner = characteristics_compare(peakon_run1024, peakon_params, 0.5, w_max=0.2)
    per = characteristics_compare(peakon_run1024, peakon_params, 0.5, per_snapshot=True)
    assert inner <= full and max(per) == full and per[0] < 1e-13


@pytest.mark.parametrize("x0", [0.0, 0.7])
def test_stumpon_jump(stumpon_params, x0):
    pr = build_profile(stumpon_params, x0=x0)
    rep = conservation_jump(pr)
    assert rep.jump_value == pytest.approx(stumpon_params.jump_product, rel=1e-10)
    assert rep.jump_left == pytest.approx(-rep.jump_right, rel=1e-12)
    assert conservation_jump(pr, levels=5).jump_value == pytest.approx(rep.jump_value, rel=1e-10)
    assert conservation_jump(pr, use_identity=True).jump_value == pytest.approx(rep.jump_value, rel=1e-10)


def test_cuspon_is_conservative(cuspon_profile):
    assert abs(conservation_jump(cuspon_profile).jump_value) < 1e-10
    with pytest.raises(OrderingViolation):
        conservation_jump(build_profile(derive_params(1.0, 0.0, 1.0, 0.0, "peakon-decay")))


def test_weak_form(stumpon_profile):
    chk = weak_residual_check(stumpon_profile)
    assert chk.line_integral > 0
    assert chk.rel_error < 1e-8


def test_richardson_exact_on_polynomials():
    hs = 0.1 * 0.5 ** np.arange(3)
    vals = 2.0 + 3.0 * hs ** (2 / 3) - hs ** (4 / 3)
    assert richardson_limit(vals, hs, [2 / 3, 4 / 3]) == pytest.approx(2.0, abs=1e-12)


def test_energy_routes_agree(cuspon_profile, cuspon_lag512):
    e_mu = energy(state_from_profile(cuspon_profile, 1024))
    # the sampled slope term misses the cusp: error ~ n^(-1/3)
    errs = [e_mu - energy(state_from_profile(cuspon_profile, n), from_samples=True) for n in (1024, 4096, 16384)]
    assert errs[0] > errs[1] > errs[2] > 0
    assert np.allclose(np.array(errs[:2]) / np.array(errs[1:]), 4 ** (1 / 3), rtol=0.05)
    # labels spread evenly in x + energy, so the cusp costs far less
    assert lagrangian_energy(cuspon_lag512) == pytest.approx(e_mu, rel=5e-3)


def test_energy_drift_small(cuspon_run512):
    end, exc = energy_drift(cuspon_run512)
    assert end < 1e-6 and exc >= end


def test_report_json():
    rep = DiagnosticsReport(energy_series=[(0.0, 1.0), (0.5, 1.0)], jump_value=1.0, jump_expected=1.0,
                            notes={"k": "v"})
    d = json.loads(rep.to_json())
    assert d["energy_series"] == [[0.0, 1.0], [0.5, 1.0]]
    assert d["char_error"] is None and d["notes"] == {"k": "v"}


def test_edge_asymmetry(stumpon_lag512, stumpon_params):
    from chwaves.evolution import SimConfig, cfl_dt, simulate
    ls = stumpon_lag512
    start = edge_asymmetry(ls, stumpon_params)
    assert start["left"] == pytest.approx(start["right"], rel=1e-9)
    fin = simulate(ls, SimConfig(dt=cfl_dt(ls, 0.3), T=0.5, n_labels=ls.n, snapshot_stride=10 ** 6)).final
    obs = edge_asymmetry(fin, stumpon_params)
    # observed: the leading edge overshoots and steepens, the trailing edge relaxes
    assert obs["right"]["max_u"] > stumpon_params.s > obs["left"]["max_u"]
    assert obs["right"]["max_slope"] > 5 * obs["left"]["max_slope"]
