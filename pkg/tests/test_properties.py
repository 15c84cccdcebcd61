import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from kdistance.convex_body import gauge, parse_body, support
from kdistance.distance_measure import build_profile, cauchy_schwarz_support, l2_weighted_nu
from kdistance.experiments.sweep import fit_slope
from kdistance.falconer import FalconerStage, distance_set_measure, interval_union_length
from kdistance.lattice import ShellHistogram, brute_force_count, enumerate_count, shell_histogram
from kdistance.spectral.bessel import bessel_j

SPECS = st.sampled_from(["ball", "ellipsoid:{}", "superellipsoid:4", "superellipsoid:6", "radial:0.04:3"])
finite = st.floats(-10, 10, allow_nan=False)


def _body(spec, d):
    if spec == "ellipsoid:{}":
        spec = "ellipsoid:" + ",".join(["2", "1"] + ["0.7"] * (d - 2))
    return parse_body(spec, d)


_BODIES = {}


def body_for(spec, d):
    key = (spec, d)
    if key not in _BODIES:
        _BODIES[key] = _body(spec, d)
    return _BODIES[key]


@settings(max_examples=40, deadline=None)
@given(SPECS, st.sampled_from([2, 3]), st.floats(0, 9))
def test_enumeration_matches_brute_force(spec, d, q):
    body = body_for(spec, d)
    assert enumerate_count(body, q) == brute_force_count(body, q)


@settings(max_examples=30, deadline=None)
@given(SPECS, st.sampled_from([2, 3]), st.floats(1, 10), st.floats(0.25, 4))
def test_histogram_partition_and_symmetry(spec, d, q, c):
    body = body_for(spec, d)
    h = shell_histogram(body, q, delta=c / q)
    assert h.counts.sum() == h.total == enumerate_count(body, q)
    assert np.all(h.counts % 2 == 0)


@settings(max_examples=60, deadline=None)
@given(SPECS, st.lists(finite, min_size=2, max_size=2), st.lists(finite, min_size=2, max_size=2))
def test_duality_pairing(spec, x, y):
    body = body_for(spec, 2)
    x, y = np.array(x), np.array(y)
    assert x @ y <= gauge(body, x) * support(body, y) + 1e-9 * (1 + np.abs(x).sum() * np.abs(y).sum())


@settings(max_examples=60, deadline=None)
@given(SPECS, st.lists(finite, min_size=2, max_size=2), st.lists(finite, min_size=2, max_size=2),
       st.floats(0, 100))
def test_gauge_is_a_norm(spec, x, y, lam):
    body = body_for(spec, 2)
    x, y = np.array(x), np.array(y)
    gx, gy = gauge(body, x), gauge(body, y)
    assert gauge(body, x + y) <= gx + gy + 1e-9 * (1 + gx + gy)
    assert math.isclose(gauge(body, lam * x), lam * gx, rel_tol=1e-9, abs_tol=1e-12)
    assert math.isclose(gauge(body, -x), gx, rel_tol=1e-12, abs_tol=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 10**6), min_size=1, max_size=60))
def test_cauchy_schwarz_exact(counts):
    counts = np.array(counts, dtype=np.int64)
    p = build_profile(ShellHistogram(float(len(counts)) / 2, 0.5, counts, int(counts.sum())),
                      parse_body("ball", 2))
    lhs, rhs, occ = cauchy_schwarz_support(p)
    assert lhs <= rhs
    if np.count_nonzero(counts[p.within()]) == 1:
        assert lhs == rhs


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10**4), st.integers(1, 40), st.sampled_from([2, 3, 4]))
def test_l2_nu_one_term(m, k, d):
    q, delta = 16.0, 1 / 32
    counts = np.zeros(600, dtype=np.int64)
    counts[k] = m
    p = build_profile(ShellHistogram(q, delta, counts, m), parse_body("ball", d))
    t0 = (k + 0.5) * delta
    assert math.isclose(l2_weighted_nu(p), delta * (q * m) ** 2 * t0 ** (1 - d), rel_tol=1e-12)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from([1, 1.5, 2, 2.5, 3]), st.floats(0.05, 200))
def test_bessel_recurrence(v, x):
    lhs = bessel_j(v - 1, x) + bessel_j(v + 1, x)
    assert math.isclose(lhs, 2 * v / x * bessel_j(v, x), abs_tol=1e-11)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 50), st.floats(0, 5)), min_size=1, max_size=30))
def test_interval_union_bounds(iv):
    lo = np.array([a for a, _ in iv])
    hi = lo + np.array([w for _, w in iv])
    u = interval_union_length(lo, hi)
    assert (hi - lo).max() - 1e-9 <= u <= (hi - lo).sum() + 1e-9
    assert u <= hi.max() - lo.min() + 1e-9


@settings(max_examples=12, deadline=None)
@given(st.sampled_from(["ball", "ellipsoid:{}"]), st.floats(1.0, 4.0), st.floats(1.0, 4.0))
def test_falconer_nondecreasing_in_s(spec, s1, s2):
    body = body_for(spec, 4)
    a, b = sorted((s1, s2))
    ra = distance_set_measure(FalconerStage(8, a, 4, body))
    rb = distance_set_measure(FalconerStage(8, b, 4, body))
    assert ra.measure_lower <= rb.measure_lower + 1e-15
    assert ra.measure_upper <= rb.measure_upper + 1e-15


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 100))
def test_fit_slope_recovers_power(k, c):
    assert math.isclose(fit_slope([(q, c * q**k) for q in (8, 16, 24, 32, 48, 64)]), k, abs_tol=1e-9)
