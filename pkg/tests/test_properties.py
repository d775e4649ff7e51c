import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chwaves.analysis import peakon_characteristic_exact, richardson_limit
from chwaves.evolution import compute_pq
from chwaves.helmholtz import kernel_sums, kernel_sums_direct
from chwaves.lagrangian import LagrangianState
from chwaves.profiles import cuspon_half_period, derive_params, half_period_from_gaps

pos = st.floats(0.05, 3.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 200), st.integers(0, 2 ** 31), st.sampled_from([None, 0.7, 4.0]))
def test_fast_kernel_matches_direct(n, seed, L):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(-2.0, 2.0, n))
    c = rng.normal(size=n)
    for f, s in zip(kernel_sums(x, c, L), kernel_sums_direct(x, c, L)):
        assert np.max(np.abs(f - s)) <= 1e-11 * max(1.0, np.max(np.abs(s)))


@settings(max_examples=30, deadline=None)
@given(pos, pos, st.floats(0.01, 0.99))
def test_cuspon_parameters(Ms, sm, frac):
    # m ranges over (-Ms/2, 0] shifted so that z < m holds
    m = -0.5 * Ms * (1 - frac)
    s, M = m + sm, m + sm + Ms
    p = derive_params(M, m, s)
    assert p.z == pytest.approx(s - M - m, abs=1e-14) and p.z < p.m
    L = cuspon_half_period(p)
    assert L > 0
    assert half_period_from_gaps(Ms, sm, m - p.z) == pytest.approx(L, rel=1e-10)
    q = p.reflect()
    assert cuspon_half_period(derive_params(q.M, q.m, q.s, q.ell, q.family)) == pytest.approx(L, rel=1e-12)


def _random_state(rng, n):
    # symmetric periodic grid with monotone y
    L = 1.0 + rng.uniform()
    dens = rng.uniform(0.2, 2.0, n)
    E = 0.5 * float(np.sum(dens)) * (2 * L / n)
    xis = -(L + E) + 2 * (L + E) * np.arange(n) / n
    y = xis * L / (L + E) + 0.05 * np.sin(2 * np.pi * xis / (2 * (L + E))) * L / (L + E)
    U = rng.normal(size=n)
    return LagrangianState(xis=xis, y=y, U=U, H=xis - y, L=L, E=E, label_period=2 * (L + E))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31), st.sampled_from([8, 33, 64]))
def test_mirror_involution_and_equivariance(seed, n):
    ls = _random_state(np.random.default_rng(seed), n)
    twice = ls.mirrored().mirrored()
    assert np.allclose(twice.y, ls.y, atol=1e-13) and np.allclose(twice.H, ls.H, atol=1e-13)
    assert np.array_equal(twice.U, ls.U)
    # P is even and Q is odd under (x, u) -> (-x, -u)
    P, Q = compute_pq(ls)
    Pm, Qm = compute_pq(ls.mirrored())
    idx = (n - np.arange(n)) % n
    scale = max(1.0, np.max(np.abs(P)))
    assert np.max(np.abs(Pm - P[idx])) < 1e-11 * scale
    assert np.max(np.abs(Qm + Q[idx])) < 1e-11 * scale


@settings(max_examples=40, deadline=None)
@given(st.floats(-0.49, 0.49), st.floats(0.0, 5.0), st.floats(0.0, 5.0))
def test_peakon_flow_property(w0, t1, t2):
    p = derive_params(1.0, 1.0 / np.cosh(0.5), 1.0, 0.0, "peakon-periodic")
    w1 = float(peakon_characteristic_exact(p, w0, t1))
    both = float(peakon_characteristic_exact(p, w1, t2))
    assert both == pytest.approx(float(peakon_characteristic_exact(p, w0, t1 + t2)), abs=1e-9)
    # offsets stay inside the cell and drift toward the left peak
    assert -0.5 <= both <= w0 + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_richardson_recovers_constant(c0, c1, c2):
    hs = 0.2 * 0.5 ** np.arange(3)
    vals = c0 + c1 * hs ** (2 / 3) + c2 * hs ** (4 / 3)
    assert richardson_limit(vals, hs, [2 / 3, 4 / 3]) == pytest.approx(c0, abs=1e-9)
