"""Desk-scale Falconer sets and the measure of their K-distance sets.

A stage is the union of Euclidean balls of radius q^{-d/s} centred at the
points of (1/q)Z^d in the unit ball.  Differences of centres lie in
(1/q)Z^d cap 2B and include (1/q)Z^d cap B, so the distance set is
sandwiched between two smeared sets of origin distances:

* lower: gauges of Z^d within gauge radius q/R (inside qB), smeared by
  2 r / R, where R is the outer radius of K;
* upper: gauges within 2q/r_in (covering 2qB), smeared by 2 r / r_in.

Here r is the ball radius; moving both endpoints of a pair by at most r
changes the K-distance by at least 2r/R along the pair direction and by at
most 2r/r_in in any direction.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.signal import fftconvolve

from .convex_body import Body
from .lattice import DEFAULT_BUDGET, shell_histogram

__all__ = [
    "FalconerStage",
    "FalconerResult",
    "distance_set_measure",
    "stage_sequence",
    "interval_union_length",
    "distinct_gauges",
    "upper_bound_constant",
    "write_falconer_csv",
]

# a bitset of this many integers is the largest exact sumset we build
_SUMSET_LIMIT = 20_000_000


@dataclass(frozen=True)
class FalconerStage:
    q: int
    s: float
    d: int
    body: Body

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 2:
            raise ValueError("q must be an integer >= 2")
        if not 0 < self.s < self.d + 1e-12:
            raise ValueError(f"s must lie in (0, d], got {self.s}")
        if self.body.d != self.d:
            raise ValueError("body dimension does not match d")

    @property
    def ball_radius(self) -> float:
        return float(self.q) ** (-self.d / self.s)


@dataclass(frozen=True)
class FalconerResult:
    stage: FalconerStage
    measure_lower: float
    measure_upper: float
    distinct_lower: int
    distinct_upper: int
    exact: bool  # distinct counts exact (integer sumset) or bucketed


def interval_union_length(lo, hi) -> float:
    """Total length of the union of [lo_i, hi_i]."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.size == 0:
        return 0.0
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    reach = np.maximum.accumulate(hi)
    gaps = np.maximum(lo[1:] - reach[:-1], 0.0)
    return float(reach[-1] - lo[0] - gaps.sum())


def _rational_weights(body: Body):
    """(integer weights, denominator, p) with L * gauge^p = sum_i W_i |x_i|^p, or None."""
    sep = body.separable()
    if sep is None:
        return None
    w, p = sep
    if not float(p).is_integer():
        return None
    fr = [Fraction(float(x)).limit_denominator(1000) for x in w]
    if any(abs(float(f) - float(x)) > 1e-12 * float(x) for f, x in zip(fr, w)):
        return None
    L = math.lcm(*(f.denominator for f in fr))
    return np.array([int(f * L) for f in fr], dtype=np.int64), L, int(p)


def _sumset_values(W, p, limit):
    """Sorted distinct values of sum_i W_i |x_i|^p that are <= limit (0 included)."""
    have = np.zeros(limit + 1)
    have[0] = 1.0
    for wi in W:
        m = int((limit / wi) ** (1.0 / p)) + 1
        terms = wi * np.arange(m + 1, dtype=np.int64) ** p
        step = np.zeros(limit + 1)
        step[terms[terms <= limit]] = 1.0
        # indicator convolution; entries are small integer counts, so > 0.5 is exact
        have = (fftconvolve(have, step)[: limit + 1] > 0.5).astype(float)
    return np.flatnonzero(have)


def distinct_gauges(body: Body, radius: float, *, budget: int = DEFAULT_BUDGET):
    """Distinct nonzero gauge values of Z^d within gauge radius ``radius``.

    Returns (values, exact).  Bodies with rational separable gauge^p use an
    integer sumset and are exact; others return None values (use buckets).
    """
    rw = _rational_weights(body)
    if rw is None:
        return None, False
    W, L, p = rw
    limit = int(math.floor(L * radius**p * (1 + 1e-12)))
    if limit > _SUMSET_LIMIT:
        return None, False
    vals = _sumset_values(W, p, limit)
    vals = vals[vals > 0]
    return (vals / L) ** (1.0 / p), True


def _envelope(body, q, radius, smear, budget, threads):
    """(measure, distinct) of the union of [g/q - smear, g/q + smear] over
    lattice gauges g <= radius, including g = 0."""
    vals, exact = distinct_gauges(body, radius, budget=budget)
    if vals is not None:
        g = np.concatenate([[0.0], vals]) / q
        lo, hi = np.maximum(g - smear, 0.0), g + smear
        return interval_union_length(lo, hi), int(len(vals)), True
    # buckets no wider than the interval width: all values in one bucket chain,
    # so each bucket contributes exactly [min - smear, max + smear]
    width = 2.0 * smear * q
    h = shell_histogram(body, radius, delta=width, check_delta=False, budget=budget,
                        threads=threads, extrema=True)
    occ = h.counts > 0
    gmin = np.concatenate([[0.0], h.gmin[occ]]) / q
    gmax = np.concatenate([[0.0], h.gmax[occ]]) / q
    lo, hi = np.maximum(gmin - smear, 0.0), gmax + smear
    return interval_union_length(lo, hi), int(occ.sum()), False


def distance_set_measure(stage: FalconerStage, *, budget: int = DEFAULT_BUDGET,
                         threads: int = 1) -> FalconerResult:
    body, q, rb = stage.body, stage.q, stage.ball_radius
    R, r_in = body.outer_radius, body.inner_radius
    m_lo, n_lo, ex_lo = _envelope(body, q, q / R, 2 * rb / R, budget, threads)
    m_hi, n_hi, ex_hi = _envelope(body, q, 2 * q / r_in, 2 * rb / r_in, budget, threads)
    return FalconerResult(stage, m_lo, m_hi, n_lo, n_hi, ex_lo and ex_hi)


def upper_bound_constant(body: Body) -> float:
    """C with measure_upper <= C q^{-d/s} q^2 (+ O(q^{-d/s})) for rational quadratic bodies.

    At most L (2q/r_in)^2 distinct values, each covering 4 r / r_in.
    """
    rw = _rational_weights(body)
    if rw is None or rw[2] != 2:
        raise ValueError("the trivial distance count needs a rational quadratic gauge")
    L = rw[1]
    r_in = body.inner_radius
    return 4.0 / r_in * L * (2.0 / r_in) ** 2


def stage_sequence(q0: int, rule: str = "literal", count: int = 3, *, factor: int = 4,
                   max_q: int | None = None) -> list[int]:
    """Stage parameters q_1 < q_2 < ...

    literal: smallest q_{i+1} with q_{i+1} > q_i^i and q_{i+1} >= 2 q_i.
    geometric: q_{i+1} = factor * q_i.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if q0 < 2:
        raise ValueError("q0 must be at least 2")
    qs = [int(q0)]
    for i in range(1, count):
        if rule == "literal":
            nxt = max(qs[-1] ** i + 1, 2 * qs[-1])
        elif rule == "geometric":
            nxt = factor * qs[-1]
        else:
            raise ValueError(f"unknown growth rule {rule!r}")
        if max_q is not None and nxt > max_q:
            raise ValueError(f"stage {i + 1} would need q = {nxt} > {max_q}")
        qs.append(nxt)
    return qs


def write_falconer_csv(results, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["q", "s", "d", "body", "measure_lower", "measure_upper", "distinct", "ball_radius"])
        for r in results:
            st = r.stage
            w.writerow([st.q, repr(float(st.s)), st.d, str(st.body), repr(r.measure_lower),
                        repr(r.measure_upper), r.distinct_lower, repr(st.ball_radius)])
