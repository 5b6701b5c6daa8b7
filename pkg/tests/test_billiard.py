import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from scipy.optimize import bisect

import properties
from cavity_billiard import BilliardMap, make_law_wu, make_sinusoidal, make_static, oracles
from cavity_billiard.billiard import BounceCache, pullback_factors, schwarzian_from_derivatives
from cavity_billiard.field_quantum import schwarzian_fd
from cavity_billiard.roots import RootFindingError, solve_increasing

LW = oracles.LawWuClosedForms(1.0, 0.1, 2)


def test_static_examples(static_map):
    assert static_map.retarded_time(3.0) == pytest.approx(2.0, abs=1e-14)
    assert static_map.f_eval(3.0) == pytest.approx(1.0, abs=1e-14)
    assert static_map.f_inverse(3.0) == pytest.approx(5.0, abs=1e-14)
    tau = np.linspace(-1, 20, 50)
    assert np.allclose(static_map.f_eval(tau), tau - 2, atol=1e-13)
    d1, d2, d3 = static_map.f_derivatives(tau)
    assert np.all(d1 == 1) and np.all(d2 == 0) and np.all(d3 == 0)
    assert np.all(static_map.schwarzian_f(tau) == 0)


def test_static_bounces(static_map):
    seq = static_map.iterate_bounces(0.0, 3)
    assert np.allclose(seq.times, [0, 2, 4, 6], atol=1e-13)
    assert np.allclose(seq.dopplers, 1.0)
    assert np.allclose(seq.anomaly(), 0.0)


def test_retarded_time_vs_bisection():
    traj = make_sinusoidal(1.0, 0.1, 2 * math.pi)
    bm = BilliardMap(traj)
    for tau in (1.5, 0.3, 7.77):
        ref = bisect(lambda t: t + traj.position(t) - tau, tau - 2, tau, xtol=1e-14)
        assert bm.retarded_time(tau) == pytest.approx(ref, abs=1e-12)


def test_lawwu_retarded_time_from_closed_form(lawwu_map, rng):
    tau = rng.uniform(-1, 6, 100)
    ref = 0.5 * (tau + oracles.lawwu_billiard(LW, tau))
    assert np.max(np.abs(lawwu_map.retarded_time(tau) - ref)) <= 1e-11


def test_lawwu_billiard_and_inverse_match_closed_form(lawwu_map):
    tau = np.linspace(-1.0, -1.0 + 3 * lawwu_map.trajectory.period, 1000)
    assert np.max(np.abs(lawwu_map.f_eval(tau) - oracles.lawwu_billiard(LW, tau))) <= 1e-9
    assert np.max(np.abs(lawwu_map.f_inverse(tau) - oracles.lawwu_billiard_inverse(LW, tau))) <= 1e-9


def test_sinusoidal_periodicity(sin2_map, rng):
    tau = rng.uniform(0, 4, 100)
    P = sin2_map.trajectory.period
    assert np.max(np.abs(sin2_map.f_eval(tau + P) - sin2_map.f_eval(tau) - P)) <= 1e-11


@pytest.mark.parametrize("name", ["static_map", "sin1_map", "sin2_map", "lawwu_map"])
def test_inverse_round_trip(name, request, rng):
    bm = request.getfixturevalue(name)
    tau = rng.uniform(-1, 15, 100)
    assert np.max(np.abs(bm.f_eval(bm.f_inverse(tau)) - tau)) <= 2 * bm.root_tolerance


@pytest.mark.parametrize("name", ["sin1_map", "sin2_map", "lawwu_map"])
def test_retardation_residual_within_tolerance(name, request, rng):
    bm = request.getfixturevalue(name)
    tau = rng.uniform(-1, 30, 500)
    ts = bm.retarded_time(tau)
    assert np.max(np.abs(ts + bm.trajectory.position(ts) - tau)) <= bm.root_tolerance
    ts = bm.advanced_time(tau)
    assert np.max(np.abs(ts - bm.trajectory.position(ts) - tau)) <= bm.root_tolerance


def test_doppler_at_return_point():
    # inward-moving return point of L0 + dL sin(pi t): t* = 1, so f' at tau = t* + L0 = 2
    w, dL = math.pi, 0.01
    bm = BilliardMap(make_sinusoidal(1.0, dL, w))
    assert bm.f_derivatives(2.0)[0] == pytest.approx((1 + w * dL) / (1 - w * dL), rel=1e-13)


def test_sinusoidal_resonant_bounces(sin1_map):
    seq = sin1_map.iterate_bounces(0.0, 50)
    n = np.arange(51)
    assert np.max(np.abs(seq.times - 2.0 * n)) <= 1e-10
    q = math.pi * 0.01
    assert np.allclose(seq.dopplers, ((1 + q) / (1 - q)) ** n[1:], rtol=1e-10)


def test_lawwu_marginal_orbits_keep_unit_doppler(lawwu_map):
    tau = np.array(oracles.lawwu_starting_points(LW))
    seq = lawwu_map.iterate_bounces(tau, 60)
    assert np.max(np.abs(seq.dopplers - 1)) <= 1e-9
    # the other candidate set grows like n^2
    other = lawwu_map.iterate_bounces(np.array([-0.5, 0.5]), 60).dopplers[-1]
    assert np.all(other > 100)


def test_lawwu_doppler_closed_form(lawwu_map, rng):
    tau = rng.uniform(-1, 1, 40)
    seq = lawwu_map.iterate_bounces(tau, 30)
    ref = oracles.lawwu_doppler(LW, tau[None, :], np.arange(1, 31)[:, None])
    assert np.max(np.abs(seq.dopplers / ref - 1)) <= 1e-9


def test_mobius_schwarzian_vanishes(rng):
    a, b, c, d = 2.0, 1.0, 0.5, 3.0
    tau = rng.uniform(0, 2, 50)
    den = c * tau + d
    det = a * d - b * c
    d1 = det / den ** 2
    d2 = -2 * c * det / den ** 3
    d3 = 6 * c * c * det / den ** 4
    assert np.max(np.abs(schwarzian_from_derivatives(d1, d2, d3))) <= 1e-9
    # the difference route is limited by roundoff / h^3
    fd = schwarzian_fd(lambda x: (a * x + b) / (c * x + d), tau, h=1e-2)
    assert np.max(np.abs(fd)) <= 1e-6


def test_sinusoidal_schwarzian_vs_fd(sin2_map, rng):
    tau = rng.uniform(1, 5, 60)
    an = sin2_map.schwarzian_f(tau)
    fd = schwarzian_fd(sin2_map.f_eval, tau, h=1e-2)
    assert np.max(np.abs(fd - an)) <= 1e-3 * np.max(np.abs(an))


def test_log_space_dopplers_survive_long_runs():
    bm = BilliardMap(make_sinusoidal(1.0, 0.1, math.pi))
    seq = bm.iterate_bounces(0.0, 2000)
    q = 0.1 * math.pi
    assert seq.log_dopplers[-1] == pytest.approx(2000 * math.log((1 + q) / (1 - q)), rel=1e-9)
    assert seq.log_dopplers[-1] > 700  # D itself would overflow
    assert np.all(np.isfinite(seq.anomaly()))


def test_pullback_inverts_forward_iteration(sin2_map, rng):
    sigma = rng.uniform(-0.999, 0.999, 200)
    n = rng.integers(0, 25, 200)
    T = np.array([sin2_map.iterate_bounces(s, int(k)).times[-1] for s, k in zip(sigma, n)])
    s_back, n_back, log_fp, schw = sin2_map.pullback(T)
    assert np.array_equal(n_back, n)
    assert np.max(np.abs(s_back - sigma)) <= 1e-9
    logD, A = pullback_factors(log_fp, schw)
    for j in rng.choice(200, 20, replace=False):
        if n[j] == 0:
            assert logD[j] == 0 and A[j] == 0
            continue
        seq = sin2_map.iterate_bounces(sigma[j], int(n[j]))
        assert logD[j] == pytest.approx(seq.log_dopplers[-1], abs=1e-10)
        assert A[j] == pytest.approx(seq.anomaly()[-1], rel=1e-8, abs=1e-14)


def test_pullback_rejects_past(sin1_map):
    with pytest.raises(ValueError):
        sin1_map.pullback(-1.5)
    with pytest.raises(ValueError):
        sin1_map.iterate_bounces(0.0, -1)


def test_bounce_cache_is_incremental_and_thread_safe(sin2_map):
    cache = BounceCache(sin2_map)
    sigma = np.linspace(-1, 1, 101)
    ref = [cache.advance(sigma, n) for n in (3, 7, 12)]
    direct = sin2_map.iterate_bounces(sigma, 12)
    assert np.allclose(ref[-1][0], direct.times[-1], atol=1e-12)
    assert np.allclose(ref[-1][1], direct.log_dopplers[-1], atol=1e-12)
    assert np.allclose(ref[-1][2], direct.anomaly()[-1], rtol=1e-10, atol=1e-15)
    fresh = BounceCache(sin2_map)
    with ThreadPoolExecutor(4) as pool:
        got = list(pool.map(lambda n: fresh.advance(sigma, n), [12, 3, 7, 12, 7, 3]))
    assert np.allclose(got[0][0], ref[-1][0], atol=1e-12)
    assert np.allclose(got[1][1], ref[0][1], atol=1e-12)


def test_solver_errors():
    with pytest.raises(RootFindingError):
        solve_increasing(lambda t: (np.tanh(t), 1 - np.tanh(t) ** 2), np.array([2.0]), np.array([0.0]),
                         step=0.1, max_expand=20)
    out = solve_increasing(lambda t: (t ** 3 + t, 3 * t * t + 1), np.array([10.0, -2.0]), np.zeros(2), step=0.5)
    assert np.allclose(out ** 3 + out, [10.0, -2.0], atol=1e-12)


# -- randomized properties (1000 cases each, fixed seeds) ---------------------
def test_property_monotonicity():
    assert properties.monotonicity(1000) == 0


def test_property_schwarzian_cocycle():
    assert properties.schwarzian_cocycle(1000) <= 1


def test_property_doppler_composition():
    assert properties.doppler_composition(1000) <= 1


def test_property_derivatives_vs_finite_differences():
    assert properties.derivatives_vs_fd(1000) <= 1


def test_property_doppler_is_inverse_derivative():
    assert properties.inverse_derivative(1000) <= 1
