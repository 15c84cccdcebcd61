"""Fourier transforms of the surface measure and indicator of a convex body.

Convention: f^(xi) = int f(x) exp(-2 pi i xi.x) dx.  The surface measure is
the (d-1)-dimensional area measure on the boundary, so the ball transform at
xi = 0 is the area of the unit sphere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from ..convex_body import (Ball, Body, Ellipsoid, _tangent_basis, gaussian_curvature,
                           sphere_area, unit_ball_volume)
from .bessel import bessel_j, normalized_bessel

__all__ = [
    "OscillationBudgetExceeded",
    "ft_ball_surface",
    "ft_ball_indicator",
    "ft_body_closed",
    "ft_body_direct",
    "ft_body_asymptotic",
    "AsymptoticModel",
    "asymptotic_model",
    "fit_correction",
    "curvature_many",
    "transform",
]

SURFACE, INDICATOR = "surface", "indicator"
DIRECT_MAX_FREQ = 50.0
_NODES_PER_OSC = 20
_MAX_NODES = 1 << 24


class OscillationBudgetExceeded(RuntimeError):
    pass


def _which(which):
    if which in ("surface", "omega", "ω"):
        return SURFACE
    if which in ("indicator", "Omega", "Ω"):
        return INDICATOR
    raise ValueError(f"unknown measure {which!r}; use 'surface' or 'indicator'")


def ft_ball_surface(d: int, r):
    """Transform of the unit sphere's area measure at |xi| = r:
    2 pi r^{1-d/2} J_{d/2-1}(2 pi r), written in the form that is regular at 0."""
    if np.any(np.asarray(r) < 0):
        raise ValueError("r must be nonnegative")
    return sphere_area(d) * normalized_bessel(d / 2.0 - 1.0, 2 * np.pi * np.asarray(r, dtype=float))


def ft_ball_indicator(d: int, r):
    """r^{-d/2} J_{d/2}(2 pi r), equal to Vol B at r = 0."""
    if np.any(np.asarray(r) < 0):
        raise ValueError("r must be nonnegative")
    return unit_ball_volume(d) * normalized_bessel(d / 2.0, 2 * np.pi * np.asarray(r, dtype=float))


def ft_body_closed(body: Body, xi, which):
    """Closed forms: ball (both measures) and ellipsoid indicator.  None otherwise."""
    which = _which(which)
    xi = np.asarray(xi, dtype=float)
    if isinstance(body, Ball):
        r = np.linalg.norm(xi, axis=-1)
        return ft_ball_surface(body.d, r) if which == SURFACE else ft_ball_indicator(body.d, r)
    if isinstance(body, Ellipsoid) and which == INDICATOR:
        a = body.axes
        return float(np.prod(a)) * ft_ball_indicator(body.d, np.linalg.norm(xi * a, axis=-1))
    return None


# ---------------------------------------------------------------------------
# direct quadrature (d = 2, 3)


def _radial_moments(rho, c, d):
    """(int_0^rho cos(c r) r^{d-1} dr, int_0^rho sin(c r) r^{d-1} dr)."""
    x = c * rho
    small = np.abs(x) < 1e-2
    cs, sn = np.cos(x), np.sin(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        if d == 2:
            re = (x * sn + cs - 1.0) / c**2
            im = (sn - x * cs) / c**2
            re_s = rho**2 * (0.5 - x**2 / 8 + x**4 / 144)
            im_s = rho**2 * (x / 3 - x**3 / 30)
        else:
            re = ((x * x - 2.0) * sn + 2.0 * x * cs) / c**3
            im = (2.0 * x * sn - (x * x - 2.0) * cs - 2.0) / c**3
            re_s = rho**3 * (1.0 / 3 - x**2 / 10 + x**4 / 168)
            im_s = rho**3 * (x / 4 - x**3 / 36)
    return np.where(small, re_s, re), np.where(small, im_s, im)


def _integrand(body, u, xi, which):
    """Per-direction contribution; returns a complex array."""
    d = body.d
    rho = 1.0 / body.gauge(u)
    c = 2 * np.pi * (u @ xi)
    if which == INDICATOR:
        re, im = _radial_moments(rho, c, d)
        return re - 1j * im
    g = np.linalg.norm(body.gauge_grad(u), axis=-1)
    return rho**d * g * np.exp(-1j * c * rho)


def _frame(xi):
    r = float(np.linalg.norm(xi))
    n = xi / r if r > 0 else np.eye(len(xi))[-1]
    B = _tangent_basis(n)
    return np.column_stack([B, n])


def _direct_once(body, xi, which, n, m):
    d = body.d
    if d == 2:
        a = 2 * np.pi * np.arange(n) / n
        u = np.column_stack([np.cos(a), np.sin(a)])
        return complex(np.sum(_integrand(body, u, xi, which)) * 2 * np.pi / n)
    # d = 3: Gauss-Legendre in the cosine along xi, trapezoid in azimuth
    F = _frame(xi)
    s, w = np.polynomial.legendre.leggauss(n)
    g = 2 * np.pi * np.arange(m) / m
    cg, sg = np.cos(g), np.sin(g)
    total = 0j
    step = max(1, 1_000_000 // m)
    for i in range(0, n, step):
        S = s[i : i + step, None]
        sb = np.sqrt(np.clip(1 - S * S, 0, None))
        loc = np.stack(np.broadcast_arrays(sb * cg, sb * sg, S), axis=-1).reshape(-1, 3)
        vals = _integrand(body, loc @ F.T, xi, which).reshape(len(S), m)
        total += np.sum(vals.sum(axis=1) * w[i : i + step])
    return complex(total * 2 * np.pi / m)


def ft_body_direct(body: Body, xi, which, *, tol: float = 1e-10, max_nodes: int = _MAX_NODES) -> complex:
    """Adaptive spherical quadrature of the transform, d in {2, 3}.

    The radial integral is done in closed form per direction; the angular
    rule starts at 20 nodes per oscillation of the phase and grows by 3/2
    until successive values agree within ``tol`` (relative to max(1, |value|)).
    """
    which = _which(which)
    d = body.d
    if d not in (2, 3):
        raise ValueError("direct quadrature is an oracle for d = 2, 3 only")
    xi = np.asarray(xi, dtype=float)
    r = float(np.linalg.norm(xi))
    if r > DIRECT_MAX_FREQ:
        raise ValueError(f"|xi| = {r} exceeds the direct-quadrature range {DIRECT_MAX_FREQ}")
    # the phase 2 pi r rho cos(angle) makes about 2 r R oscillations per half turn;
    # in azimuth only the variation of rho contributes
    R, R_in = body.outer_radius, body.inner_radius
    n = 32 + int(math.ceil(_NODES_PER_OSC * 2 * r * R * (2 if d == 2 else 1)))
    m = 32 + int(math.ceil(_NODES_PER_OSC * 2 * r * (R - R_in)))
    prev = _direct_once(body, xi, which, n, m)
    while True:
        n, m = 3 * n // 2, 3 * m // 2
        if (n if d == 2 else n * m) > max_nodes:
            raise OscillationBudgetExceeded(f"no convergence at |xi|={r} within {max_nodes} nodes")
        cur = _direct_once(body, xi, which, n, m)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur


# ---------------------------------------------------------------------------
# stationary-phase asymptotics


def curvature_many(body: Body, thetas, step: float = 1e-4) -> np.ndarray:
    """Gaussian curvature at many unit normals (rows of ``thetas``)."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    if isinstance(body, Ball):
        return np.ones(len(thetas))
    if isinstance(body, Ellipsoid):
        # kappa = h^{d+1} / prod a_i^2
        h = np.linalg.norm(thetas * body.axes, axis=-1)
        return h ** (body.d + 1) / float(np.prod(body.axes**2))
    return np.array([gaussian_curvature(body, t, step) for t in thetas])


def _even_monomials(d, degree):
    exps = []
    for deg in range(0, degree + 1, 2):
        for combo in combinations_with_replacement(range(d), deg):
            e = [0] * d
            for i in combo:
                e[i] += 1
            exps.append(tuple(e))
    return np.array(exps, dtype=int)


@dataclass
class AsymptoticModel:
    """Per-body coefficients; the j=1 correction is an even polynomial in theta."""

    body: Body
    exponents: dict = field(default_factory=dict)  # which -> exponent matrix
    coefs: dict = field(default_factory=dict)  # which -> coefficient vector
    band: tuple = (10.0, 40.0)

    def correction(self, theta, which) -> np.ndarray:
        which = _which(which)
        if which not in self.coefs:
            raise KeyError(f"no fitted correction for {which}")
        th = np.atleast_2d(theta)
        basis = np.prod(th[:, None, :] ** self.exponents[which][None, :, :], axis=-1)
        return basis @ self.coefs[which]


_MODELS: dict = {}


def _terms(body, xi, which, need_corr):
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    d = body.d
    r = np.linalg.norm(xi, axis=-1)
    if np.any(r == 0):
        raise ValueError("asymptotic form needs xi != 0")
    theta = xi / r[:, None]
    h = np.asarray(body.support(theta), dtype=float).reshape(-1)
    kappa = curvature_many(body, theta)
    amp = np.sqrt(h / kappa)
    x = 2 * np.pi * h * r
    if which == SURFACE:
        lead = 2 * np.pi * amp * bessel_j(d / 2 - 1, x) * r ** (1 - d / 2)
        nxt = bessel_j(d / 2, x) * r ** (-d / 2) if need_corr else None
    else:
        lead = amp * bessel_j(d / 2, x) * r ** (-d / 2)
        nxt = bessel_j(d / 2 + 1, x) * r ** (-d / 2 - 1) if need_corr else None
    return theta, lead, nxt


def fit_correction(body: Body, which, *, band=(10.0, 40.0), n_dirs: int = 24, n_freq: int = 48,
                   degree: int = 6, seed: int = 0) -> AsymptoticModel:
    """Least-squares fit of the j=1 coefficient against direct quadrature."""
    which = _which(which)
    d = body.d
    if d not in (2, 3):
        raise ValueError("the correction is calibrated by direct quadrature, d = 2, 3 only")
    rng = np.random.default_rng(seed)
    if d == 2:
        a = np.pi * (np.arange(n_dirs) + 0.5) / n_dirs
        dirs = np.column_stack([np.cos(a), np.sin(a)])
    else:
        dirs = rng.normal(size=(n_dirs, d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    freqs = np.linspace(band[0], band[1], n_freq)
    xi = (dirs[:, None, :] * freqs[None, :, None]).reshape(-1, d)
    direct = np.array([ft_body_direct(body, z, which).real for z in xi])
    theta, lead, nxt = _terms(body, xi, which, True)
    exps = _even_monomials(d, degree)
    basis = np.prod(theta[:, None, :] ** exps[None, :, :], axis=-1)
    # weigh rows by the inverse envelope so the fit minimizes relative error
    r = np.linalg.norm(xi, axis=-1)
    wgt = r ** ((d - 1) / 2.0 if which == SURFACE else (d + 1) / 2.0)
    A = basis * (nxt * wgt)[:, None]
    coef, *_ = np.linalg.lstsq(A, (direct - lead) * wgt, rcond=None)
    model = _MODELS.setdefault(id(body), AsymptoticModel(body, band=tuple(band)))
    model.exponents[which] = exps
    model.coefs[which] = coef
    return model


def asymptotic_model(body: Body, which) -> AsymptoticModel:
    which = _which(which)
    model = _MODELS.get(id(body))
    if model is None or model.body is not body or which not in model.coefs:
        model = fit_correction(body, which)
    return model


def ft_body_asymptotic(body: Body, xi, which, order: str = "leading"):
    """Stationary-phase approximation of the transform.

    leading:  u0 J_{d/2-1}(2 pi h(xi)) |xi|^{1-d/2}   (surface)
              U0 J_{d/2}(2 pi h(xi)) |xi|^{-d/2}       (indicator)
    with U0 = sqrt(h(theta) / kappa(theta)) and u0 = 2 pi U0, where h is the
    support function and kappa the Gaussian curvature at the boundary point
    with normal theta.  two-term adds u1(theta) J_{d/2}(.) |xi|^{-d/2}
    (resp. U1 J_{d/2+1}(.) |xi|^{-d/2-1}) with u1 fitted once per body.
    For |xi| <= 1 the direct or closed form is returned when available.
    """
    which = _which(which)
    if order not in ("leading", "two-term"):
        raise ValueError("order must be 'leading' or 'two-term'")
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim == 1
    xs = np.atleast_2d(xi)
    r = np.linalg.norm(xs, axis=-1)
    out = np.empty(len(xs))
    low = r <= 1.0
    if low.any():
        closed = ft_body_closed(body, xs[low], which)
        if closed is not None:
            out[low] = closed
        elif body.d in (2, 3):
            out[low] = [ft_body_direct(body, z, which).real for z in xs[low]]
        else:
            low = np.zeros_like(low)
    hi = ~low
    if hi.any():
        theta, lead, nxt = _terms(body, xs[hi], which, order == "two-term")
        val = lead
        if order == "two-term" and not isinstance(body, Ball):
            val = lead + asymptotic_model(body, which).correction(theta, which) * nxt
        out[hi] = val
    return float(out[0]) if single else out


def transform(body: Body, xi, which, order: str = "leading"):
    """Closed form when one exists, stationary-phase form otherwise."""
    closed = ft_body_closed(body, xi, which)
    if closed is not None:
        return closed
    return ft_body_asymptotic(body, xi, which, order)
