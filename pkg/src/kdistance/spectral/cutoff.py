"""Smooth compactly supported bump phi and its radial Fourier profile psi."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from ..convex_body import sphere_area
from .bessel import normalized_bessel

__all__ = ["Cutoff", "build_cutoff", "bump_profile", "DEFAULT_R0"]

DEFAULT_R0 = 0.4
_DECAY_N = 6


def _smoothstep(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
    return a / (a + b)


def bump_profile(r, r0: float):
    """Unnormalized radial bump: 1 on [0, r0], smooth shoulder, 0 beyond 2 r0."""
    r = np.asarray(r, dtype=float)
    return np.where(r <= r0, 1.0, _smoothstep((2.0 * r0 - r) / r0))


@dataclass(frozen=True)
class Cutoff:
    """psi(rho) = phi-hat(xi) at |xi| = rho, sampled on a uniform grid.

    ``phi(x) = c * bump_profile(|x|, r0)`` with c chosen so the integral of
    phi is one, hence psi(0) = 1.  Beyond ``rho[-1]`` the profile is below
    ``tail_level`` and is returned as zero.
    """

    r0: float
    d: int
    rho: np.ndarray
    values: np.ndarray
    norm_const: float
    decay_N: int
    decay_C: float
    tail_level: float
    _spline: CubicSpline = field(repr=False, compare=False)

    def __call__(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        out = np.zeros_like(r)
        inside = r <= self.rho[-1]
        out[inside] = self._spline(r[inside])
        return out if out.ndim else float(out)

    def phi(self, x_norm):
        """phi at Euclidean radius |x| (unit speck, before q-scaling)."""
        return self.norm_const * bump_profile(x_norm, self.r0)

    @property
    def support_radius(self) -> float:
        return 2.0 * self.r0

    def decay_bound(self, r):
        return self.decay_C * (1.0 + np.asarray(r, dtype=float)) ** (-self.decay_N)

    def tail_radius(self, rel: float = 1e-6, power: float = 0.0) -> float:
        """Smallest U with int_U^inf psi^2 u^power du <= rel * int_0^inf psi^2 u^power du."""
        w = self.values**2 * self.rho**power
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * np.diff(self.rho))])
        tail = cum[-1] - cum
        idx = int(np.argmax(tail <= rel * cum[-1]))
        return float(self.rho[idx])

    def l2_squared(self, power: float = 0.0) -> float:
        w = self.values**2 * self.rho**power
        return float(np.sum(0.5 * (w[1:] + w[:-1]) * np.diff(self.rho)))


def build_cutoff(r0: float = DEFAULT_R0, d: int = 2, *, samples_per_unit: float | None = None,
                 rho_max: float | None = None, nodes: int = 3000) -> Cutoff:
    if not r0 > 0:
        raise ValueError("cutoff radius r0 must be positive")
    return _build(float(r0), int(d), samples_per_unit, rho_max, int(nodes))


@lru_cache(maxsize=16)
def _build(r0, d, samples_per_unit, rho_max, nodes):
    v = d / 2.0 - 1.0
    # psi(rho) = |S^{d-1}| c int_0^{2 r0} b(r) Lambda_v(2 pi rho r) r^{d-1} dr
    # The plateau [0, r0] is done in closed form:
    #   int_0^R Lambda_v(k r) r^{d-1} dr = R^d / d * Lambda_{d/2}(k R)
    x, w = np.polynomial.legendre.leggauss(nodes)
    r = r0 + 0.5 * r0 * (x + 1.0)
    w = 0.5 * r0 * w
    shoulder = bump_profile(r, r0) * r ** (d - 1) * w
    mass = sphere_area(d) * (r0**d / d + float(np.sum(shoulder)))
    c = 1.0 / mass

    # features of psi live on the scale 1/(2 r0)
    spu = samples_per_unit or 100.0 * r0
    rho_max = rho_max or 40.0 / r0
    rho = np.linspace(0.0, rho_max, int(math.ceil(rho_max * spu)) + 1)
    vals = np.empty_like(rho)
    chunk = max(1, 2_000_000 // nodes)
    for i in range(0, len(rho), chunk):
        k = 2 * np.pi * rho[i : i + chunk]
        plateau = r0**d / d * normalized_bessel(d / 2.0, k * r0)
        sh = normalized_bessel(v, np.outer(k, r)) @ shoulder
        vals[i : i + chunk] = sphere_area(d) * c * (plateau + sh)
    vals[0] = 1.0

    spline = CubicSpline(rho, vals, bc_type=((1, 0.0), "not-a-knot"))
    # certify the interpolant callers see, not just its knots; the margin covers
    # extrema between the refined samples
    fine = np.linspace(0.0, rho_max, 16 * (len(rho) - 1) + 1)
    decay_C = float(np.max(np.abs(spline(fine)) * (1.0 + fine) ** _DECAY_N)) * (1.0 + 1e-6)
    tail = float(np.max(np.abs(vals[rho >= 0.9 * rho_max])))
    return Cutoff(r0=r0, d=d, rho=rho, values=vals, norm_const=c, decay_N=_DECAY_N,
                  decay_C=decay_C, tail_level=tail, _spline=spline)
