import math

import numpy as np
import pytest

from cavity_billiard import BilliardMap, ExtendedProfile, InitialProfile, make_sinusoidal, make_static
from cavity_billiard.field_classical import DomainError


def _profile(traj, rho0=None):
    bm = BilliardMap(traj)
    L = float(traj.position(0.0))
    return ExtendedProfile(rho0 or InitialProfile.uniform(1.0, L), bm)


def test_static_uniform():
    p = _profile(make_static(1.0), InitialProfile.uniform(0.7, 1.0))
    tau = np.linspace(-1, 30, 200)
    assert np.allclose(p.rho_at(tau), 0.7, rtol=1e-14)
    assert np.allclose(p.energy_density(5.5, np.linspace(0, 1, 11)), 1.4)
    assert p.total_energy(3.3) == pytest.approx(1.4, rel=1e-12)
    for n in (1, 4, 9):
        assert p.total_energy_recursive(1.0, n) == pytest.approx(1.4, rel=1e-12)


def test_seed_identity_and_t0_symmetry():
    seed = InitialProfile.gaussian(0.2, 0.1, 3.0, 1.0, floor=0.5)
    p = _profile(make_sinusoidal(1.0, 0.01, 2 * math.pi), seed)
    s = np.linspace(-1, 1, 101)
    assert np.array_equal(p.rho_at(s), seed(s))
    x = np.linspace(0, 1, 21)
    assert np.allclose(p.energy_density(0.0, x), seed(x) + seed(-x), rtol=1e-14)


def test_resonant_growth_along_positive_orbit():
    p = _profile(make_sinusoidal(1.0, 0.01, math.pi))
    q = 0.01 * math.pi
    n = np.arange(0, 30)
    assert np.allclose(p.rho_at(2.0 * n), ((1 + q) / (1 - q)) ** (2 * n), rtol=1e-9)


def test_peak_asymptotics():
    bm = BilliardMap(make_sinusoidal(1.0, 0.01, math.pi))
    seed = InitialProfile.gaussian(0.0, 0.3, 1.0, 1.0, floor=0.2)
    p = ExtendedProfile(seed, bm)
    n, eps = 40, 0.05
    seq = bm.iterate_bounces(eps, n)
    D = seq.dopplers[-1]
    assert p.rho_at(seq.times[-1]) == pytest.approx(seed(eps) * D * D, rel=1e-10)


def test_non_negative_and_domain_errors():
    p = _profile(make_sinusoidal(1.0, 0.05, 2 * math.pi), InitialProfile.from_samples(
        np.linspace(-1, 1, 9), [0, 1, 0, 2, 0, 1, 0, 3, 0]))
    assert np.all(p.rho_at(np.linspace(-1, 25, 3000)) >= 0)
    with pytest.raises(DomainError):
        p.rho_at(-1.5)
    with pytest.raises(DomainError):
        p.energy_density(2.0, 1.5)
    with pytest.raises(DomainError):
        p.total_energy(-1.0)
    with pytest.raises(DomainError):
        InitialProfile.from_samples([-0.5, 0, 0.5, 1], [1, 1, 1, 1], half_width=1.0)


@pytest.mark.parametrize("N", [1, 2])
def test_route_equivalence(N):
    p = _profile(make_sinusoidal(1.0, 0.01, N * math.pi))
    for n in (1, 7, 20, 30):
        t = p.bounce_midpoint(1.0, n)
        assert p.total_energy(t) == pytest.approx(p.total_energy_recursive(1.0, n), rel=1e-6)


def test_energy_growth_rate_N1():
    p = _profile(make_sinusoidal(1.0, 0.01, math.pi))
    n, t, E = p.energy_curve(80)
    slope = np.polyfit(n[40:], np.log(E[40:]), 1)[0]
    w_dL = math.pi * 0.01
    assert slope == pytest.approx(2 * w_dL, rel=0.02)


def test_equal_weight_seeds_share_growth_exponent():
    bm = BilliardMap(make_sinusoidal(1.0, 0.01, 2 * math.pi))
    a = ExtendedProfile(InitialProfile.uniform(1.0, 1.0), bm)
    b = ExtendedProfile(InitialProfile.gaussian(0.0, 0.4, 2.0, 1.0, floor=0.3), bm)
    ea, eb = a.energy_curve(60)[2], b.energy_curve(60)[2]
    n = np.arange(1, 61)
    sa = np.polyfit(n[30:], np.log(ea[30:]), 1)[0]
    sb = np.polyfit(n[30:], np.log(eb[30:]), 1)[0]
    assert sa == pytest.approx(sb, rel=1e-2)


def test_two_equal_peaks_N2():
    p = _profile(make_sinusoidal(1.0, 0.01, 2 * math.pi))
    peaks = p.peak_metrics(2 * 20 + 0.25)
    assert len(peaks) == 2
    assert peaks[0].height == pytest.approx(peaks[1].height, rel=1e-2)
    assert peaks[0].width == pytest.approx(peaks[1].width, rel=5e-2)


def test_off_peak_decay_N2():
    # background between peaks follows D_n^2 at the negative orbit tau- = 0
    p = _profile(make_sinusoidal(1.0, 0.01, 2 * math.pi))
    q = 0.02 * math.pi
    n = np.arange(5, 30)
    rho_neg = p.rho_at(2.0 * n)
    assert np.allclose(rho_neg, ((1 - q) / (1 + q)) ** (2 * n), rtol=1e-9)


def test_static_has_no_peaks():
    assert _profile(make_static(1.0)).peak_metrics(5.25) == []
