import math

import numpy as np
import pytest

from kdistance.convex_body import (Ball, BodyError, Ellipsoid, dual_body, gauge, gaussian_curvature,
                                   parse_body, support, support_point, volume)

BODIES = ["ball", "ellipsoid:2,1", "superellipsoid:4", "radial:0.05:7"]


def test_gauge_examples(ball2, ellipse21):
    assert gauge(ball2, np.array([3.0, 4.0])) == pytest.approx(5.0)
    assert gauge(ellipse21, np.array([2.0, 0.0])) == pytest.approx(1.0)


@pytest.mark.parametrize("spec", BODIES)
def test_gauge_and_support_vanish_at_origin(spec):
    body = parse_body(spec, 2)
    assert gauge(body, np.zeros(2)) == 0.0
    assert support(body, np.zeros(2)) == 0.0


def test_support_examples(ball2, ellipse21):
    assert support(ball2, np.array([3.0, 4.0])) == pytest.approx(5.0)
    assert support(ellipse21, np.array([1.0, 0.0])) == pytest.approx(2.0)


def test_ellipse_support_matches_boundary_grid_search(ellipse21, rng):
    s = np.linspace(0, 2 * np.pi, 200001)
    boundary = np.stack([2 * np.cos(s), np.sin(s)], axis=1)
    for _ in range(5):
        x = rng.normal(size=2)
        assert support(ellipse21, x) == pytest.approx(float(np.max(boundary @ x)), rel=1e-9)


@pytest.mark.parametrize("spec", ["superellipsoid:4", "radial:0.05:7"])
def test_numeric_support_matches_grid_search(spec):
    body = parse_body(spec, 2)
    s = np.linspace(0, 2 * np.pi, 20001)
    dirs = np.stack([np.cos(s), np.sin(s)], axis=1)
    boundary = dirs / np.asarray(body.gauge(dirs))[:, None]
    x = np.array([0.3, -1.1])
    assert support_point(body, x).value == pytest.approx(float(np.max(boundary @ x)), rel=1e-6)


def test_dual_examples(ellipse21, rng):
    assert isinstance(dual_body(Ball(3)), Ball)
    star = dual_body(Ellipsoid([2.0, 3.0, 0.5]))
    assert isinstance(star, Ellipsoid)
    np.testing.assert_allclose(star.axes, [0.5, 1 / 3, 2.0])
    x = rng.normal(size=(50, 2))
    np.testing.assert_allclose(gauge(dual_body(ellipse21), x), support(ellipse21, x), rtol=1e-12)


@pytest.mark.parametrize("spec", BODIES)
def test_double_dual_is_identity(spec, rng):
    body = parse_body(spec, 2)
    x = rng.normal(size=(20, 2))
    np.testing.assert_allclose(gauge(dual_body(dual_body(body)), x), gauge(body, x), atol=1e-8)


def test_volume_examples():
    assert volume(parse_body("ball", 2)) == pytest.approx(math.pi)
    assert volume(parse_body("ellipsoid:2,1")) == pytest.approx(2 * math.pi)
    assert volume(parse_body("ball", 4)) == pytest.approx(math.pi**2 / 2)


def test_superellipsoid_volume_closed_form():
    # area of |x|^4 + |y|^4 <= 1 is Gamma(1/4)^2 / (2 Gamma(1/2))
    area = math.gamma(0.25) ** 2 / (2 * math.sqrt(math.pi))
    assert volume(parse_body("superellipsoid:4", 2)) == pytest.approx(area, rel=1e-12)


def test_curvature_examples(ellipse21):
    assert gaussian_curvature(Ball(3), np.array([0.0, 0.6, 0.8])) == pytest.approx(1.0, abs=1e-6)
    assert gaussian_curvature(ellipse21, np.array([1.0, 0.0])) == pytest.approx(2.0, rel=1e-5)
    flat = parse_body("radial:0:3", 2)
    for th in np.linspace(0, np.pi, 5):
        assert gaussian_curvature(flat, np.array([np.cos(th), np.sin(th)])) == pytest.approx(1.0, abs=1e-6)


def test_ellipse_curvature_against_parameterization(ellipse21):
    # boundary (2 cos s, sin s): kappa = ab / (a^2 sin^2 + b^2 cos^2)^{3/2}
    s = 0.7
    normal = np.array([np.cos(s) / 2, np.sin(s)])
    normal /= np.linalg.norm(normal)
    ref = 2.0 / (4 * np.sin(s) ** 2 + np.cos(s) ** 2) ** 1.5
    assert gaussian_curvature(ellipse21, normal) == pytest.approx(ref, rel=1e-5)


@pytest.mark.parametrize("text", ["blob", "ellipsoid:", "ellipsoid:1,-1", "ball:3", "superellipsoid:x"])
def test_bad_specs_raise(text):
    with pytest.raises(BodyError):
        parse_body(text, 2)


def test_spec_round_trip():
    for spec in ["ball", "ellipsoid:2,1,1", "superellipsoid:4:1,2,1", "radial:0.05:7"]:
        body = parse_body(spec, 3)
        assert str(parse_body(str(body), 3)) == str(body)


@pytest.mark.parametrize("spec,d", [("ellipsoid:2,1", 2), ("superellipsoid:4", 2), ("radial:0.05:7", 2),
                                    ("superellipsoid:4", 3)])
def test_pairing_equality_at_maximizer(spec, d, rng):
    body = parse_body(spec, d)
    for _ in range(5):
        x = rng.normal(size=d)
        res = support_point(body, x)
        y = res.maximizer
        assert gauge(body, y) == pytest.approx(1.0, abs=1e-6)
        assert x @ y == pytest.approx(res.value, rel=1e-6)


@pytest.mark.parametrize("spec", ["superellipsoid:4", "radial:0.05:7"])
def test_double_dual_ratio_on_many_points(spec, rng):
    body = parse_body(spec, 2)
    x = rng.normal(size=(1000, 2))
    ratio = np.asarray(gauge(dual_body(dual_body(body)), x)) / np.asarray(gauge(body, x))
    assert np.max(np.abs(ratio - 1)) <= 1e-6


@pytest.mark.parametrize("axes", [(1.0, 1.0), (2.0, 1.0), (1.0, 1.0, 1.0), (2.0, 1.0, 0.5),
                                  (1.0, 1.0, 1.0, 1.0), (2.0, 1.0, 1.0, 1.5)])
def test_quadrature_volume_matches_closed_form(axes):
    from kdistance.convex_body import _sphere_volume

    body = Ellipsoid(list(axes))
    assert _sphere_volume(body) == pytest.approx(body.volume, rel=1e-6)
