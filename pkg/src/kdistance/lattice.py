"""Streaming enumeration of Z^d inside dilates of a convex body.

Points are never stored.  The bounding box is cut into slabs on the
leading coordinate; each slab is evaluated with numpy and reduced to a
private shell histogram, and the partial histograms are merged.  Merging
is plain addition (plus elementwise min/max for the optional extrema),
so the result does not depend on slab order or worker count.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .convex_body import Body

__all__ = [
    "DEFAULT_BUDGET",
    "BudgetExceeded",
    "ShellHistogram",
    "bucket_index",
    "default_delta",
    "enumerate_count",
    "shell_histogram",
    "annulus_count",
    "iter_gauges",
    "iter_points",
    "distinct_distances",
    "brute_force_count",
    "brute_force_histogram",
    "write_histogram_csv",
]

DEFAULT_BUDGET = 10**9

# gauge values within this many bucket widths below a boundary snap up;
# lattice gauges of quadratic bodies sit much farther from boundaries
_SNAP = 1e-9
# relative slack for "gauge <= q" on exact boundary hits
_EDGE = 1e-12


class BudgetExceeded(RuntimeError):
    pass


def default_delta(q: float) -> float:
    return 1.0 / (2.0 * q)


def bucket_index(t, delta: float):
    """Bucket k covers [k*delta, (k+1)*delta)."""
    return np.floor(np.asarray(t, dtype=float) / delta + _SNAP).astype(np.int64)


@dataclass
class ShellHistogram:
    q: float
    delta: float
    counts: np.ndarray
    total: int
    gmin: np.ndarray | None = field(default=None, repr=False)
    gmax: np.ndarray | None = field(default=None, repr=False)

    @property
    def nbuckets(self) -> int:
        return len(self.counts)

    @property
    def t_lo(self) -> np.ndarray:
        return np.arange(self.nbuckets) * self.delta

    @property
    def t_hi(self) -> np.ndarray:
        return (np.arange(self.nbuckets) + 1) * self.delta

    @property
    def t_mid(self) -> np.ndarray:
        return (np.arange(self.nbuckets) + 0.5) * self.delta

    def bucket_of(self, t: float) -> int:
        return int(bucket_index(t, self.delta))

    def merge(self, other: "ShellHistogram") -> "ShellHistogram":
        if other.delta != self.delta:
            raise ValueError("cannot merge histograms with different bucket widths")
        n = max(self.nbuckets, other.nbuckets)
        counts = _pad(self.counts, n) + _pad(other.counts, n)
        gmin = gmax = None
        if self.gmin is not None and other.gmin is not None:
            gmin = np.fmin(_pad(self.gmin, n, np.nan), _pad(other.gmin, n, np.nan))
            gmax = np.fmax(_pad(self.gmax, n, np.nan), _pad(other.gmax, n, np.nan))
        return ShellHistogram(max(self.q, other.q), self.delta, counts,
                              self.total + other.total, gmin, gmax)

    def coarsen(self, factor: int) -> "ShellHistogram":
        """Merge each run of ``factor`` consecutive buckets."""
        n = -(-self.nbuckets // factor) * factor
        c = _pad(self.counts, n).reshape(-1, factor).sum(axis=1)
        gmin = gmax = None
        if self.gmin is not None:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                gmin = np.nanmin(_pad(self.gmin, n, np.nan).reshape(-1, factor), axis=1)
                gmax = np.nanmax(_pad(self.gmax, n, np.nan).reshape(-1, factor), axis=1)
        return ShellHistogram(self.q, self.delta * factor, c, self.total, gmin, gmax)


def _pad(a, n, fill=0):
    if len(a) >= n:
        return a
    out = np.full(n, fill, dtype=a.dtype)
    out[: len(a)] = a
    return out


def _box_extents(body: Body, radius: float) -> np.ndarray:
    return np.floor(radius * np.asarray(body.extents) * (1 + _EDGE) + 1e-9).astype(np.int64)


def _check_budget(ext, budget):
    size = 1
    for e in ext:
        size *= int(2 * e + 1)
    if size > budget:
        raise BudgetExceeded(f"bounding box has {size} points, budget is {budget}")
    return size


def _slab_gauges(body: Body, x0: int, ext: np.ndarray, radius: float) -> np.ndarray:
    """Gauges of the nonzero points with leading coordinate x0 and gauge <= radius."""
    d = body.d
    rest = [np.arange(-e, e + 1) for e in ext[1:]]
    sep = body.separable()
    lim = radius * (1 + _EDGE)
    if sep is not None:
        w, p = sep
        # sum_i w_i |x_i|^p accumulated by broadcasting, no coordinate array
        acc = np.asarray(w[0] * abs(float(x0)) ** p)
        for i, r in enumerate(rest, start=1):
            acc = acc[..., None] + w[i] * np.abs(r).astype(float) ** p
        powered = acc.ravel()
        powered = powered[powered <= lim**p]
        g = np.sqrt(powered) if p == 2 else powered ** (1.0 / p)
    else:
        grids = list(np.meshgrid(*rest, indexing="ij"))
        pts = np.stack([np.full(grids[0].shape, x0)] + grids, axis=-1).reshape(-1, d).astype(float)
        # cheap Euclidean rejection before evaluating the gauge
        r2 = np.einsum("ij,ij->i", pts, pts)
        pts = pts[r2 <= (lim * body.outer_radius) ** 2 * (1 + 1e-9)]
        g = np.asarray(body.gauge(pts)).ravel()
        g = g[g <= lim]
    if x0 == 0:
        g = g[g > 0]
    return g


def iter_gauges(body: Body, radius: float, *, budget: int = DEFAULT_BUDGET):
    """Yield arrays of gauge values of nonzero lattice points in radius*K, slab by slab."""
    ext = _box_extents(body, radius)
    _check_budget(ext, budget)
    for x0 in range(-int(ext[0]), int(ext[0]) + 1):
        yield _slab_gauges(body, x0, ext, radius)


def iter_points(body: Body, radius: float, *, budget: int = DEFAULT_BUDGET):
    """Yield (points, gauges) of nonzero lattice points in radius*K, slab by slab."""
    ext = _box_extents(body, radius)
    _check_budget(ext, budget)
    lim = radius * (1 + _EDGE)
    rest = [np.arange(-e, e + 1) for e in ext[1:]]
    grids = [g.ravel() for g in np.meshgrid(*rest, indexing="ij")]
    for x0 in range(-int(ext[0]), int(ext[0]) + 1):
        pts = np.column_stack([np.full(grids[0].shape, x0)] + grids).astype(float)
        g = np.asarray(body.gauge(pts)).ravel()
        keep = (g <= lim) & (g > 0)
        yield pts[keep], g[keep]


def _slab(body: Body, x0: int, ext: np.ndarray, radius: float, delta: float | None,
          nb: int, extrema: bool):
    g = _slab_gauges(body, x0, ext, radius)
    count = int(g.size)
    if delta is None:
        return count, None, None, None
    k = bucket_index(g, delta)
    hist = np.bincount(k, minlength=nb)
    gmin = gmax = None
    if extrema:
        gmin = np.full(len(hist), np.nan)
        gmax = np.full(len(hist), np.nan)
        if g.size:
            order = np.argsort(k, kind="stable")
            ks, gs = k[order], g[order]
            starts = np.flatnonzero(np.r_[True, ks[1:] != ks[:-1]])
            gmin[ks[starts]] = np.minimum.reduceat(gs, starts)
            gmax[ks[starts]] = np.maximum.reduceat(gs, starts)
    return count, hist, gmin, gmax


def _run(body: Body, radius: float, delta: float | None, budget: int, threads: int,
         extrema: bool = False):
    ext = _box_extents(body, radius)
    _check_budget(ext, budget)
    nb = int(bucket_index(radius * (1 + _EDGE), delta)) + 1 if delta else 0
    xs = range(-int(ext[0]), int(ext[0]) + 1)
    work = lambda x0: _slab(body, x0, ext, radius, delta, nb, extrema)
    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, xs))
    else:
        parts = [work(x0) for x0 in xs]
    return parts, nb


def enumerate_count(body: Body, q: float, d: int | None = None, *,
                    budget: int = DEFAULT_BUDGET, threads: int = 1) -> int:
    """#(Z^d cap qK minus the origin)."""
    _check_dim(body, d)
    if q < 0:
        raise ValueError("q must be nonnegative")
    parts, _ = _run(body, q, None, budget, threads)
    return sum(p[0] for p in parts)


def shell_histogram(body: Body, q: float, d: int | None = None, delta: float | None = None, *,
                    budget: int = DEFAULT_BUDGET, threads: int = 1, extrema: bool = False,
                    check_delta: bool = True) -> ShellHistogram:
    """Counts Gamma_k of nonzero lattice points with gauge in [k delta, (k+1) delta)."""
    _check_dim(body, d)
    delta = default_delta(q) if delta is None else float(delta)
    if check_delta and not (1.0 / (4 * q) - 1e-15 <= delta <= 4.0 / q + 1e-15):
        raise ValueError(f"delta={delta} outside [1/(4q), 4/q] for q={q}")
    parts, nb = _run(body, q, delta, budget, threads, extrema)
    counts = np.zeros(nb, dtype=np.int64)
    total = 0
    gmin = np.full(nb, np.nan) if extrema else None
    gmax = np.full(nb, np.nan) if extrema else None
    for c, h, lo, hi in parts:
        total += c
        counts[: len(h)] += h
        if extrema:
            gmin[: len(lo)] = np.fmin(gmin[: len(lo)], lo)
            gmax[: len(hi)] = np.fmax(gmax[: len(hi)], hi)
    return ShellHistogram(float(q), delta, counts, total, gmin, gmax)


def annulus_count(body: Body, t: float, delta: float, *, budget: int = DEFAULT_BUDGET) -> int:
    """Gamma(t, delta): nonzero lattice points with gauge in [t, t + delta)."""
    lo, hi = t * (1 - _EDGE), (t + delta) * (1 - _EDGE)
    return sum(int(np.count_nonzero((g >= lo) & (g < hi))) for g in iter_gauges(body, t + delta, budget=budget))


def distinct_distances(hist: ShellHistogram) -> int:
    """Number of occupied buckets: distinct K-distances from the origin up to
    the bucket resolution."""
    return int(np.count_nonzero(hist.counts))


def _brute_gauges(body: Body, q: float) -> np.ndarray:
    R = int(math.ceil(q * body.outer_radius))
    axes = [np.arange(-R, R + 1)] * body.d
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, body.d).astype(float)
    g = np.asarray(body.gauge(pts)).ravel()
    return g[(g > 0) & (g <= q * (1 + _EDGE))]


def brute_force_count(body: Body, q: float) -> int:
    """Full cube of side 2 ceil(q R) + 1, no slabs or fast paths.  Test oracle only."""
    return int(_brute_gauges(body, q).size)


def brute_force_histogram(body: Body, q: float, delta: float) -> np.ndarray:
    """Bucket counts from the full-cube oracle, same bucket rule as shell_histogram."""
    nb = int(bucket_index(q * (1 + _EDGE), delta)) + 1
    return np.bincount(bucket_index(_brute_gauges(body, q), delta), minlength=nb)


def write_histogram_csv(hist: ShellHistogram, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "t_lo", "t_hi", "count"])
        for k, (lo, hi, c) in enumerate(zip(hist.t_lo, hist.t_hi, hist.counts)):
            w.writerow([k, repr(float(lo)), repr(float(hi)), int(c)])


def _check_dim(body, d):
    if d is not None and d != body.d:
        raise ValueError(f"dimension mismatch: body has d={body.d}, got d={d}")
