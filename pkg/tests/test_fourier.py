import math

import numpy as np
import pytest
from scipy import integrate, special

from kdistance.convex_body import Ball, Ellipsoid, parse_body
from kdistance.spectral.bessel import bessel_j
from kdistance.spectral.fourier import (ft_ball_indicator, ft_ball_surface, ft_body_asymptotic,
                                        ft_body_direct, transform)


def test_ball_surface_examples():
    assert ft_ball_surface(2, 0.0) == pytest.approx(2 * math.pi)
    assert ft_ball_surface(3, 0.0) == pytest.approx(4 * math.pi)
    r = np.linspace(0.05, 20, 300)
    np.testing.assert_allclose(ft_ball_surface(3, r), 2 * np.sin(2 * np.pi * r) / r, atol=1e-12)
    np.testing.assert_allclose(ft_ball_surface(2, r), 2 * np.pi * special.j0(2 * np.pi * r), atol=1e-12)


def test_circle_transform_against_arc_quadrature():
    for r in (0.3, 2.2, 7.5):
        ref = integrate.quad(lambda s: math.cos(2 * math.pi * r * math.cos(s)), 0, 2 * math.pi,
                             limit=400, epsabs=1e-13)[0]
        assert ft_ball_surface(2, r) == pytest.approx(ref, abs=1e-8)
        assert ft_body_direct(Ball(2), np.array([r, 0.0]), "surface").real == pytest.approx(ref, abs=1e-8)


@pytest.mark.parametrize("spec,d", [("ball", 2), ("ellipsoid:2,1", 2), ("superellipsoid:4", 2),
                                    ("ball", 3), ("ellipsoid:2,1,1", 3)])
def test_direct_indicator_at_zero_is_volume(spec, d):
    body = parse_body(spec, d)
    val = ft_body_direct(body, np.zeros(d), "indicator")
    assert val.real == pytest.approx(body.volume, rel=1e-9)
    assert abs(val.imag) <= 1e-8


def test_ball_indicator_closed_form():
    for r in (0.4, 3.3, 11.0):
        xi = np.array([r * 0.6, r * 0.8])
        val = ft_body_direct(Ball(2), xi, "indicator")
        assert val.real == pytest.approx(bessel_j(1, 2 * math.pi * r) / r, abs=1e-8)
        assert abs(val.imag) <= 1e-8
        assert ft_ball_indicator(2, r) == pytest.approx(special.j1(2 * math.pi * r) / r, abs=1e-12)


def test_ellipsoid_indicator_is_scaled_ball():
    e = Ellipsoid([2.0, 1.0, 0.5])
    for xi in (np.array([0.7, -0.2, 1.1]), np.array([3.0, 2.0, 4.0])):
        ref = 1.0 * ft_ball_indicator(3, np.linalg.norm(e.axes * xi))
        val = ft_body_direct(e, xi, "indicator")
        assert val.real == pytest.approx(ref, abs=1e-8)
        assert abs(val.imag) <= 1e-8


def test_direct_surface_is_real():
    val = ft_body_direct(parse_body("superellipsoid:4", 2), np.array([4.0, 1.5]), "surface")
    assert abs(val.imag) <= 1e-8


def test_ball_asymptotic_is_exact():
    xi = np.array([[3.0, 4.0], [0.2, 12.0]])
    for which, exact in (("surface", ft_ball_surface), ("indicator", ft_ball_indicator)):
        vals = ft_body_asymptotic(Ball(2), xi, which)
        np.testing.assert_allclose(vals, exact(2, np.linalg.norm(xi, axis=1)), atol=1e-12)


def test_ellipse_asymptotic_envelope_and_phase():
    body = parse_body("ellipsoid:1.5,1")
    theta = np.array([math.cos(0.4), math.sin(0.4)])
    h = float(body.dual().gauge(theta))
    # extrema of J_0(2 pi h r) where the leading term is at its envelope
    zeros1 = special.jn_zeros(1, 200) / (2 * math.pi * h)
    ext = zeros1[(zeros1 >= 10) & (zeros1 <= 40)][::8]
    lead = ft_body_asymptotic(body, np.outer(ext, theta), "surface")
    direct = np.array([ft_body_direct(body, r * theta, "surface").real for r in ext])
    env = np.abs(direct).max()
    assert np.max(np.abs(lead - direct)) / env <= 0.10
    # signs agree at the extrema, so zeros interlace the same way
    assert np.all(np.sign(lead) == np.sign(direct))


def test_transform_prefers_closed_form():
    xi = np.array([[1.0, 2.0, 2.0]])
    assert transform(Ball(3), xi, "surface")[0] == pytest.approx(ft_ball_surface(3, 3.0))
