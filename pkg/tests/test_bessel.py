import math

import numpy as np
import pytest
from scipy import integrate, optimize, special

from kdistance.spectral.bessel import UnsupportedOrder, bessel_j, normalized_bessel


def test_examples():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(0.5, math.pi / 2) == pytest.approx(2 / math.pi, abs=1e-12)
    assert bessel_j(1, 0.0) == 0.0


def test_first_zero_of_j1():
    root = optimize.brentq(lambda x: bessel_j(1, x), 3.0, 4.5, xtol=1e-14)
    assert root == pytest.approx(3.83171, abs=1e-5)
    # integral representation J_1(x) = (1/pi) int_0^pi cos(tau - x sin tau) d tau
    rep = integrate.quad(lambda s: math.cos(s - root * math.sin(s)), 0, math.pi, epsabs=1e-13)[0] / math.pi
    assert abs(rep) < 1e-10


@pytest.mark.parametrize("v", [0, 0.5, 1, 1.5, 2, 2.5, 3])
def test_against_scipy(v):
    x = np.concatenate([np.linspace(0, 5, 101), np.linspace(5, 60, 551), [150.0, 1e3, 1e4]])
    np.testing.assert_allclose(bessel_j(v, x), special.jv(v, x), atol=1e-12, rtol=1e-10)


@pytest.mark.parametrize("v", [0.5, 1, 1.5, 2])
def test_recurrence(v):
    x = np.linspace(0.1, 80, 400)
    lhs = bessel_j(v - 1 if v >= 1 else 0, x) if v >= 1 else None
    if lhs is None:
        return
    np.testing.assert_allclose(lhs + bessel_j(v + 1, x), 2 * v / x * bessel_j(v, x), atol=1e-11)


def test_normalized_is_one_at_zero_and_matches():
    assert normalized_bessel(1, 0.0) == 1.0
    x = np.array([1e-6, 0.3, 2.0, 9.0, 40.0])
    ref = special.gamma(2) * (2 / x) * special.jv(1, x)
    np.testing.assert_allclose(normalized_bessel(1, x), ref, rtol=1e-10, atol=1e-14)


def test_rejects_bad_input():
    with pytest.raises(UnsupportedOrder):
        bessel_j(0.3, 1.0)
    with pytest.raises(UnsupportedOrder):
        bessel_j(-1, 1.0)
    with pytest.raises(ValueError):
        bessel_j(0, -1.0)
