"""Distance measure, counting function and discrepancy from a shell histogram.

The smoothed measure of each annulus is replaced by the sharp count:
``nu0_k = q * Gamma_k``.  Lattice points are never blurred here; the
cutoff only enters on the spectral side.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .convex_body import Body
from .lattice import ShellHistogram, bucket_index

__all__ = [
    "DistanceProfile",
    "build_profile",
    "l1_mass",
    "mean_square",
    "l2_weighted_nu",
    "l2_weighted_N",
    "cauchy_schwarz_support",
    "landau_envelope_ratio",
    "write_profile_csv",
]


@dataclass(frozen=True)
class DistanceProfile:
    q: float
    d: int
    delta: float
    volume: float
    counts: np.ndarray  # Gamma_k
    t: np.ndarray  # bucket midpoints
    nu0: np.ndarray
    N0: np.ndarray  # includes the origin
    E0: np.ndarray
    nu_w: np.ndarray
    E_w: np.ndarray
    body_name: str = ""

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def within(self, t_max: float | None = None) -> np.ndarray:
        """Mask of buckets whose lower edge lies below t_max (default q)."""
        t_max = self.q if t_max is None else t_max
        return np.arange(len(self.t)) * self.delta < t_max * (1 - 1e-12)

    def E0_at(self, t: float) -> float:
        """#(tK cap Z^d) - t^d Vol K, read from the bucket containing t.

        Exact when no lattice gauge lies in [t, end of that bucket).
        """
        k = int(bucket_index(t, self.delta))
        if k >= len(self.N0):
            raise ValueError(f"t={t} is beyond the profile")
        return float(self.N0[k] - t**self.d * self.volume)


def build_profile(hist: ShellHistogram, body: Body, volume: float | None = None) -> DistanceProfile:
    """Populate nu0, N0, E0 and their t^{(1-d)/2}-weighted versions.

    ``volume`` overrides Vol K (used by the negative-control hook).
    """
    d = body.d
    vol = body.volume if volume is None else float(volume)
    counts = np.asarray(hist.counts, dtype=np.int64)
    t = hist.t_mid
    nu0 = hist.q * counts.astype(float)
    N0 = 1 + np.cumsum(counts)
    E0 = N0 - t**d * vol
    w = t ** ((1.0 - d) / 2.0)
    return DistanceProfile(
        q=hist.q, d=d, delta=hist.delta, volume=vol, counts=counts, t=t,
        nu0=nu0, N0=N0, E0=E0, nu_w=w * nu0, E_w=w * E0, body_name=str(body),
    )


def l1_mass(profile: DistanceProfile) -> tuple[float, float]:
    """Darboux sum of nu0 with step 1/q (the sharp-count normalization), and its
    ratio to Vol K q^d."""
    total = float(profile.counts.sum())
    if total == 0:
        return 0.0, 0.0
    return total, total / (profile.volume * profile.q**profile.d)


def mean_square(profile: DistanceProfile) -> tuple[float, float]:
    """(D_A, D_K): root of (1/q^2) * sum over buckets below q of Gamma^2, resp. E0^2."""
    m = profile.within()
    q2 = profile.q**2
    D_A = math.sqrt(float(np.sum(profile.counts[m].astype(float) ** 2)) / q2)
    D_K = math.sqrt(float(np.sum(profile.E0[m] ** 2)) / q2)
    if profile.total == 0:
        return 0.0, 0.0
    return D_A, D_K


def l2_weighted_nu(profile: DistanceProfile) -> float:
    """sum_k nu_w_k^2 * delta over buckets below q."""
    m = profile.within()
    return float(np.sum(profile.nu_w[m] ** 2) * profile.delta)


def l2_weighted_N(profile: DistanceProfile) -> tuple[float, float]:
    """(||N_q||^2 Darboux sum, ratio to q^{d+2}); N_q is not square integrable for d=2."""
    if profile.d < 3:
        raise ValueError("weighted counting function is not in L^2 for d = 2")
    m = profile.within()
    if profile.total == 0:
        return 0.0, 0.0
    Nw = profile.t[m] ** ((1.0 - profile.d) / 2.0) * profile.N0[m]
    val = float(np.sum(Nw**2) * profile.delta)
    return val, val / profile.q ** (profile.d + 2)


def cauchy_schwarz_support(profile: DistanceProfile) -> tuple[int, int, int]:
    """((sum Gamma)^2, #occupied * sum Gamma^2, #occupied) over buckets below q.

    Integer arithmetic, so lhs <= rhs holds exactly.
    """
    m = profile.within()
    g = [int(c) for c in profile.counts[m]]
    s1 = sum(g)
    s2 = sum(c * c for c in g)
    occ = sum(1 for c in g if c)
    return s1 * s1, occ * s2, occ


def landau_envelope_ratio(profile: DistanceProfile, t_min: float = 1.0) -> float:
    """max over t_min <= t_k <= q of |E0_k| / (t^{d-2+2/(d-1)} + t^{d-1}/q)."""
    d = profile.d
    m = profile.within() & (profile.t >= t_min)
    t = profile.t[m]
    env = t ** (d - 2 + 2.0 / (d - 1)) + t ** (d - 1) / profile.q
    return float(np.max(np.abs(profile.E0[m]) / env))


def write_profile_csv(profile: DistanceProfile, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "nu0", "N0", "E0", "nu_w", "E_w"])
        for row in zip(profile.t, profile.nu0, profile.N0, profile.E0, profile.nu_w, profile.E_w):
            w.writerow([repr(float(row[0])), repr(float(row[1])), int(row[2]),
                        repr(float(row[3])), repr(float(row[4])), repr(float(row[5]))])
