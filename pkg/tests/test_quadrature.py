import math

import numpy as np
import pytest
from scipy import integrate as si

from cavity_billiard.quadrature import GAUSS_W, KRONROD_W, NODES, QuadratureError, integrate


@pytest.mark.parametrize("deg", range(0, 24))
def test_kronrod_exact_to_degree_23(deg):
    ref = (1 - (-1) ** (deg + 1)) / (deg + 1)
    assert KRONROD_W @ NODES ** deg == pytest.approx(ref, abs=1e-14)
    if deg <= 13:
        assert GAUSS_W @ NODES ** deg == pytest.approx(ref, abs=1e-14)


def test_smooth_integrals():
    assert integrate(np.sin, 0, math.pi).value == pytest.approx(2.0, rel=1e-12)
    assert integrate(np.exp, 1, 0).value == pytest.approx(-(math.e - 1), rel=1e-12)
    assert integrate(np.exp, 2, 2).value == 0.0


def test_narrow_peak_against_scipy():
    w = 1e-5
    f = lambda x: 1 / (1 + ((x - 0.3) / w) ** 2)
    ref = w * (math.atan(0.7 / w) + math.atan(0.3 / w))
    res = integrate(f, 0, 1, epsrel=1e-10, points=[0.3])
    assert res.value == pytest.approx(ref, rel=1e-9)
    assert res.value == pytest.approx(si.quad(f, 0, 1, points=[0.3], limit=500)[0], rel=1e-8)
    # unseeded: the adaptive bisection still finds it
    assert integrate(f, 0, 1, epsrel=1e-9).value == pytest.approx(ref, rel=1e-7)


def test_reports_failure():
    with pytest.raises(QuadratureError) as exc:
        integrate(lambda x: np.sign(np.sin(1 / np.maximum(x, 1e-300))), 0, 1, epsrel=1e-14, max_intervals=200)
    assert exc.value.value is not None
