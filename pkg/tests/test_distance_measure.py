import math

import numpy as np
import pytest

from kdistance.convex_body import parse_body
from kdistance.distance_measure import (build_profile, cauchy_schwarz_support, l1_mass, l2_weighted_N,
                                        l2_weighted_nu, landau_envelope_ratio, mean_square)
from kdistance.lattice import ShellHistogram, shell_histogram


def _empty(q=8.0, delta=1 / 16):
    return ShellHistogram(q, delta, np.zeros(int(q / delta) + 1, dtype=np.int64), 0)


def test_E0_just_above_five(ball2):
    # bucket [5, 5.05) holds norm 5 but not sqrt(26)
    p = build_profile(shell_histogram(ball2, 8, delta=0.05), ball2)
    assert p.E0_at(5.0) == pytest.approx(81 - 25 * math.pi)
    assert 81 - 25 * math.pi == pytest.approx(2.4602, abs=1e-4)


def test_N0_and_support(ball2):
    p = build_profile(shell_histogram(ball2, 10), ball2)
    assert np.all(np.diff(p.N0) >= 0)
    assert p.N0[-1] == p.total + 1
    assert np.all(p.nu0[p.t > p.q + p.delta] == 0)


def test_l1_examples(ball2):
    total, ratio = l1_mass(build_profile(shell_histogram(ball2, 5), ball2))
    assert total == 80
    assert ratio == pytest.approx(80 / (25 * math.pi))
    assert ratio == pytest.approx(1.019, abs=1e-3)
    assert l1_mass(build_profile(_empty(), ball2)) == (0.0, 0.0)


def test_mean_square_against_scalar_recomputation(ball2):
    q, delta = 5, 0.1
    D_A, D_K = mean_square(build_profile(shell_histogram(ball2, q, delta=delta), ball2))
    nb = int(round(q / delta))
    gamma = [0] * nb
    for x in range(-q, q + 1):
        for y in range(-q, q + 1):
            r = math.hypot(x, y)
            if 0 < r <= q:
                k = min(int(r / delta + 1e-9), nb)
                if k < nb:
                    gamma[k] += 1
    sa = sk = 0.0
    n = 1
    for k in range(nb):
        n += gamma[k]
        t = (k + 0.5) * delta
        sa += gamma[k] ** 2
        sk += (n - t * t * math.pi) ** 2
    assert D_A == pytest.approx(math.sqrt(sa / q**2), rel=1e-12)
    assert D_K == pytest.approx(math.sqrt(sk / q**2), rel=1e-12)


def test_mean_square_empty(ball2):
    assert mean_square(build_profile(_empty(), ball2)) == (0.0, 0.0)


def test_l2_nu_single_bucket(ball2):
    q, delta, m, k = 8.0, 0.125, 6, 20
    counts = np.zeros(70, dtype=np.int64)
    counts[k] = m
    p = build_profile(ShellHistogram(q, delta, counts, m), ball2)
    t0 = (k + 0.5) * delta
    assert l2_weighted_nu(p) == pytest.approx(delta * (q * m) ** 2 * t0 ** (1 - 2))


def test_l2_nu_refinement_stable():
    # halving delta halves every Gamma_k, so sum (q Gamma)^2 delta halves
    body = parse_body("ball", 3)
    a = l2_weighted_nu(build_profile(shell_histogram(body, 16, delta=1 / 32), body))
    b = l2_weighted_nu(build_profile(shell_histogram(body, 16, delta=1 / 64), body))
    assert 2 * b / a == pytest.approx(1.0, rel=0.01)


def test_l2_nu_lower_bound():
    for spec, d in [("ball", 2), ("ellipsoid:2,1,1", 3)]:
        body = parse_body(spec, d)
        for q in (8, 16):
            p = build_profile(shell_histogram(body, q), body)
            assert l2_weighted_nu(p) >= 0.1 * body.volume * q**d


def test_l2_N_examples(ball2):
    body = parse_body("ball", 3)
    vals = [l2_weighted_N(build_profile(shell_histogram(body, q), body)) for q in (8, 16, 32)]
    ratios = [r for _, r in vals]
    assert max(ratios) / min(ratios) <= 2
    assert vals[0][0] < vals[1][0] < vals[2][0]
    assert l2_weighted_N(build_profile(_empty(), body)) == (0.0, 0.0)
    with pytest.raises(ValueError):
        l2_weighted_N(build_profile(shell_histogram(ball2, 8), ball2))


def test_cauchy_schwarz_examples(ball2):
    p = build_profile(shell_histogram(ball2, 12), ball2)
    lhs, rhs, occ = cauchy_schwarz_support(p)
    assert lhs <= rhs and occ > 0
    counts = np.zeros(50, dtype=np.int64)
    counts[7] = 4
    lhs, rhs, occ = cauchy_schwarz_support(build_profile(ShellHistogram(8.0, 0.125, counts, 4), ball2))
    assert (lhs, rhs, occ) == (16, 16, 1)


def test_support_size_grows_like_q_squared():
    body = parse_body("ball", 4)
    c8 = cauchy_schwarz_support(build_profile(shell_histogram(body, 8), body))[2] / 8**2
    c32 = cauchy_schwarz_support(build_profile(shell_histogram(body, 32), body))[2] / 32**2
    assert c32 >= c8 / 2


def test_landau_ratio_finite(ball2):
    r = landau_envelope_ratio(build_profile(shell_histogram(ball2, 16), ball2))
    assert 0 < r < 10
