import math

import pytest

from chwaves.evolution import SimConfig, cfl_dt, simulate
from chwaves.helmholtz import state_from_profile
from chwaves.lagrangian import identity_labeling, to_lagrangian
from chwaves.profiles import GOLDEN, build_profile, cuspon_half_period, derive_params

# filled by test_acceptance; printed at the end of the session
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])


@pytest.fixture(scope="session")
def cuspon_params():
    return derive_params(GOLDEN, 0.0, 1.0, 0.0, "cuspon-periodic")


@pytest.fixture(scope="session")
def cuspon_profile(cuspon_params):
    return build_profile(cuspon_params)


@pytest.fixture(scope="session")
def stumpon_params(cuspon_params):
    ell = 2.0 - cuspon_half_period(cuspon_params)
    return derive_params(GOLDEN, 0.0, 1.0, ell, "stumpon-periodic")


@pytest.fixture(scope="session")
def stumpon_profile(stumpon_params):
    return build_profile(stumpon_params)


@pytest.fixture(scope="session")
def peakon_params():
    # trough m = s / cosh(L) with L = 1/2
    return derive_params(1.0, 1.0 / math.cosh(0.5), 1.0, 0.0, "peakon-periodic")


@pytest.fixture(scope="session")
def peakon_profile(peakon_params):
    return build_profile(peakon_params, x0=0.5)


@pytest.fixture(scope="session")
def cuspon_lag512(cuspon_profile):
    return to_lagrangian(state_from_profile(cuspon_profile, 2048), 512)


def _cuspon_run(profile, n):
    ls = to_lagrangian(state_from_profile(profile, 2048), n)
    cfg = SimConfig(dt=cfl_dt(ls, 0.3), T=2.0 * profile.period, n_labels=n, snapshot_stride=100)
    return simulate(ls, cfg)


@pytest.fixture(scope="session")
def cuspon_run512(cuspon_profile):
    return _cuspon_run(cuspon_profile, 512)


@pytest.fixture(scope="session")
def cuspon_run1024(cuspon_profile):
    return _cuspon_run(cuspon_profile, 1024)


@pytest.fixture(scope="session")
def stumpon_lag512(stumpon_profile):
    return to_lagrangian(state_from_profile(stumpon_profile, 2048), 512)


@pytest.fixture(scope="session")
def stumpon_run(stumpon_lag512):
    ls = stumpon_lag512
    stops = [0.01 * k for k in range(1, 21)]
    cfg = SimConfig(dt=cfl_dt(ls, 0.3), T=0.2, n_labels=ls.n, snapshot_stride=10 ** 6)
    return simulate(ls, cfg, snapshot_times=stops)


@pytest.fixture(scope="session")
def peakon_run1024(peakon_profile):
    ls = identity_labeling(state_from_profile(peakon_profile, 1024))
    cfg = SimConfig(dt=1e-3, T=10.0, n_labels=1024, labeling="identity", snapshot_stride=100, cfl=1.0)
    return simulate(ls, cfg)
