import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from cavity_billiard.kinematics import (
    Collision1D,
    KinematicsDomainError,
    photon_energy_after,
    reflect_nonrelativistic,
    reflect_relativistic,
)

speeds = st.floats(-0.99, 0.99)


@pytest.mark.parametrize("v,u,up,expected", [(1, 0, 0, -1), (-1, 0.5, 0.5, 2), (0.3, 0.1, 0.2, 0)])
def test_nonrelativistic_examples(v, u, up, expected):
    assert reflect_nonrelativistic(v, u, up) == pytest.approx(expected, abs=1e-15)


def test_heavy_target_default():
    assert reflect_nonrelativistic(-1, 0.5) == pytest.approx(2.0)


def _rapidity_oracle(v, u, up):
    mpmath.mp.dps = 40
    return float(mpmath.tanh(mpmath.atanh(u) + mpmath.atanh(up) - mpmath.atanh(v)))


@pytest.mark.parametrize("v,u,up", [(0.5, 0, 0), (-0.5, 0.5, 0.5), (0, 0.2, 0.2)])
def test_relativistic_examples(v, u, up):
    assert reflect_relativistic(v, u, up) == pytest.approx(_rapidity_oracle(v, u, up), rel=1e-14)


def test_relativistic_known_values():
    assert reflect_relativistic(0.5, 0, 0) == pytest.approx(-0.5)
    # three rapidities of artanh(0.5): 0.5 (+) 0.5 = 0.8, 0.8 (+) 0.5 = 13/14
    assert reflect_relativistic(-0.5, 0.5, 0.5) == pytest.approx(13 / 14, rel=1e-14)
    assert reflect_relativistic(0, 0.2, 0.2) == pytest.approx(0.3846153846, rel=1e-9)


@settings(max_examples=200, deadline=None)
@given(speeds, speeds, speeds)
def test_relativistic_stays_subluminal_and_matches_oracle(v, u, up):
    out = reflect_relativistic(v, u, up)
    assert abs(out) < 1
    assert out == pytest.approx(_rapidity_oracle(v, u, up), rel=1e-9, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(-0.05, 0.05), st.floats(-0.05, 0.05), st.floats(-0.05, 0.05))
def test_relativistic_reduces_to_galilean_at_low_speed(v, u, up):
    # the difference is third order in the speeds
    assert abs(reflect_relativistic(v, u, up) - reflect_nonrelativistic(v, u, up)) <= 2e-3


@pytest.mark.parametrize("bad", [(1.0, 0, 0), (0, -1.0, 0), (0, 0, 1.5)])
def test_relativistic_rejects_light_speed(bad):
    with pytest.raises(KinematicsDomainError):
        reflect_relativistic(*bad)


def test_photon_energy_examples():
    assert photon_energy_after(1, 0) == 1
    assert photon_energy_after(1, -0.5) == pytest.approx(3.0)
    assert photon_energy_after(1, 0, M=10) == pytest.approx(1 / 1.2)
    assert photon_energy_after(1, 0, M=math.inf) == 1


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 100), speeds)
def test_photon_doppler_consistency(E, u):
    assert photon_energy_after(E, u) / E == pytest.approx((1 - u) / (1 + u), rel=1e-14)


@pytest.mark.parametrize("E,u,M", [(0, 0, None), (-1, 0, None), (1, 1.0, None), (1, 0, 0.0), (1, 0, -3)])
def test_photon_domain_errors(E, u, M):
    with pytest.raises(KinematicsDomainError):
        photon_energy_after(E, u, M)


def test_collision_object_api():
    c = Collision1D(v=-0.5, u=0.5, relativistic=True)
    assert c.u_prime == 0.5
    assert c.reflect() == pytest.approx(reflect_relativistic(-0.5, 0.5, 0.5))
    with pytest.raises(KinematicsDomainError):
        Collision1D(v=0.1).photon_energy_after()
