"""Bessel functions J_v of integer and half-integer order.

Regimes (vectorized over x):

* x <= 12: ascending power series.  Largest term is ~e^x / sqrt(x), so the
  absolute rounding error stays below 1e-11.
* 12 < x <= 50: half-integer orders by upward recurrence from the closed
  forms of J_{1/2}, J_{-1/2} (stable while v < x); integer orders by
  Miller's backward recurrence normalized with J_0 + 2 sum J_2k = 1.
* x > 50: Hankel's asymptotic expansion, summed until terms drop below
  machine precision.  For half-integer orders the series terminates.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

__all__ = ["bessel_j", "normalized_bessel", "UnsupportedOrder", "MAX_ORDER"]

MAX_ORDER = 8.0
SERIES_MAX_X = 12.0
ASYMPTOTIC_MIN_X = 50.0


class UnsupportedOrder(ValueError):
    pass


def _check_order(v):
    v = float(v)
    if v < 0 or v > MAX_ORDER or not (2 * v).is_integer():
        raise UnsupportedOrder(f"order {v} is not a half-integer in [0, {MAX_ORDER}]")
    return v


def bessel_j(v: float, x):
    """J_v(x) for half-integer v in [0, MAX_ORDER] and x >= 0."""
    v = _check_order(v)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("bessel_j requires x >= 0")
    out = np.empty_like(x)
    small = x <= SERIES_MAX_X
    large = x > ASYMPTOTIC_MIN_X
    mid = ~small & ~large
    if small.any():
        out[small] = _series(v, x[small])
    if mid.any():
        if v.is_integer():
            out[mid] = _miller(int(v), x[mid])
        else:
            out[mid] = _half_integer_upward(v, x[mid])
    if large.any():
        out[large] = _hankel_asymptotic(v, x[large])
    return out if out.ndim else float(out)


def normalized_bessel(v: float, x):
    """Gamma(v+1) (2/x)^v J_v(x), equal to 1 at x = 0."""
    v = _check_order(v)
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    nz = x > 0
    if nz.any():
        xs = x[nz]
        small = xs <= SERIES_MAX_X
        res = np.empty_like(xs)
        # series in (x/2)^2 directly avoids 0/0 near the origin
        if small.any():
            z = (xs[small] / 2.0) ** 2
            term = np.ones_like(z)
            acc = term.copy()
            for k in range(1, 200):
                term = -term * z / (k * (k + v))
                acc += term
                if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(acc), 1e-300)):
                    break
            res[small] = acc
        if (~small).any():
            xl = xs[~small]
            res[~small] = math.exp(gammaln(v + 1)) * (2.0 / xl) ** v * bessel_j(v, xl)
        out[nz] = res
    return out if out.ndim else float(out)


def _series(v, x):
    z = (x / 2.0) ** 2
    lead = np.where(x > 0, (x / 2.0) ** v, 1.0 if v == 0 else 0.0)
    term = np.full_like(x, math.exp(-gammaln(v + 1)))
    acc = term.copy()
    kmin = float(x.max()) / 2 if x.size else 0.0  # terms grow until k ~ x/2
    for k in range(1, 300):
        term = -term * z / (k * (k + v))
        acc += term
        if k > kmin and np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(acc), 1e-300)):
            break
    return lead * acc


def _half_integer_upward(v, x):
    s = np.sqrt(2.0 / (np.pi * x))
    jm = s * np.cos(x)  # J_{-1/2}
    j = s * np.sin(x)  # J_{1/2}
    order = 0.5
    while order < v:
        jm, j = j, (2 * order / x) * j - jm
        order += 1.0
    return j


def _miller(n, x):
    # start well above max(n, x) so the seed's error is damped out
    start = int(max(n, x.max()) + 30 + 10 * math.sqrt(x.max()))
    start += start % 2
    jp1 = np.zeros_like(x)
    j = np.full_like(x, 1e-300)
    norm = np.zeros_like(x)
    want = np.zeros_like(x)
    for k in range(start, 0, -1):
        jm1 = (2 * k / x) * j - jp1
        jp1, j = j, jm1
        # j now holds the (unnormalized) order k-1 value
        if k - 1 == n:
            want = j.copy()
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2 * j
        big = np.abs(j) > 1e250
        if big.any():
            for arr in (j, jp1, norm, want):
                arr[big] *= 1e-250
    norm += j  # J_0 term
    return want / norm


def _hankel_asymptotic(v, x):
    mu = 4.0 * v * v
    chi = x - (v / 2.0 + 0.25) * np.pi
    P = np.ones_like(x)
    Q = np.zeros_like(x)
    term = np.ones_like(x)
    k = 1
    prev = np.inf
    while k < 60:
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if np.all(term == 0):
            break
        if k % 2 == 1:
            # odd k feeds Q with sign (+, -, +, ...)
            Q = Q + (term if (k // 2) % 2 == 0 else -term)
        else:
            P = P + (-term if (k // 2) % 2 == 1 else term)
        mag = float(np.max(np.abs(term)))
        if mag < 1e-17 or mag > prev:
            break
        prev = mag
        k += 1
    return np.sqrt(2.0 / (np.pi * x)) * (P * np.cos(chi) - Q * np.sin(chi))
