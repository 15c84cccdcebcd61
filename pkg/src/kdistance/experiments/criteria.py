"""The sixteen acceptance checks, each runnable on its own."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from ..convex_body import parse_body
from ..distance_measure import (DistanceProfile, build_profile, cauchy_schwarz_support, l1_mass,
                                l2_weighted_nu, landau_envelope_ratio, mean_square)
from ..falconer import FalconerStage, distance_set_measure, upper_bound_constant
from ..lattice import (DEFAULT_BUDGET, brute_force_count, brute_force_histogram, enumerate_count,
                       shell_histogram)
from ..spectral.bessel import bessel_j
from ..spectral.cutoff import build_cutoff
from ..spectral.fourier import curvature_many, fit_correction, ft_body_asymptotic, ft_body_direct
from ..spectral.hankel import hankel_transform, l2_norm
from ..spectral.series import (convergence_gaps, duality_l2, mattila_integral, poisson_direct,
                               poisson_series, smoothing_is_exact)
from .sweep import fit_slope

__all__ = ["CriterionResult", "Context", "CRITERIA", "run_criteria", "format_line", "format_table"]

SWEEP_Q = (8, 16, 24, 32, 48, 64)
NEGATIVE_CONTROL_FACTOR = 1.05


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0


@dataclass
class Context:
    threads: int = 1
    budget: int = DEFAULT_BUDGET
    volume_factor: float = 1.0  # != 1 corrupts Vol K in every profile (negative control)
    _profiles: dict = field(default_factory=dict)

    def profile(self, spec: str, d: int, q: int) -> DistanceProfile:
        key = (spec, d, q, self.volume_factor)
        if key not in self._profiles:
            body = parse_body(spec, d)
            hist = shell_histogram(body, q, budget=self.budget, threads=self.threads)
            self._profiles[key] = build_profile(hist, body, volume=body.volume * self.volume_factor)
        return self._profiles[key]

    def all_profiles(self):
        return list(self._profiles.items())


def _fmt(x):
    return f"{x:.4g}"


# ---------------------------------------------------------------------------


def c1_oracle(ctx):
    bodies = {2: ["ball", "ellipsoid:2,1", "superellipsoid:4"],
              3: ["ball", "ellipsoid:2,1,1", "superellipsoid:4"]}
    bad = []
    for d, specs in bodies.items():
        for spec in specs:
            body = parse_body(spec, d)
            for q in range(1, 13):
                h = shell_histogram(body, q, budget=ctx.budget)
                if enumerate_count(body, q, budget=ctx.budget) != brute_force_count(body, q):
                    bad.append(f"{spec} d={d} q={q} count")
                if not np.array_equal(h.counts, brute_force_histogram(body, q, h.delta)):
                    bad.append(f"{spec} d={d} q={q} histogram")
    return not bad, "72 cases agree" if not bad else "; ".join(bad[:4])


def c2_gauss_circle(ctx):
    b = parse_body("ball", 2)
    n5, n10 = 1 + enumerate_count(b, 5), 1 + enumerate_count(b, 10)
    return (n5, n10) == (81, 317), f"N(5)={n5}, N(10)={n10}"


def _slopes(ctx, spec, d, qs):
    DK = [(q, mean_square(ctx.profile(spec, d, q))[1]) for q in qs]
    DA = [(q, mean_square(ctx.profile(spec, d, q))[0]) for q in qs]
    return DK, DA


def c3_mean_square_d4(ctx):
    ok, parts = True, []
    for spec in ("ball", "ellipsoid:2,1,1,1"):
        DK, DA = _slopes(ctx, spec, 4, SWEEP_Q)
        sK, sA = fit_slope(DK), fit_slope(DA)
        norm = [v / q**2 for q, v in DK]
        spread = max(norm) / min(norm)
        ok &= sK <= 2.25 and sA <= 2.25 and spread <= 4
        parts.append(f"{spec}: slope D_K={sK:.3f} D_A={sA:.3f} spread D_K/q^2={spread:.3f}")
    return ok, "; ".join(parts)


def c4_mean_square_d3(ctx):
    DK, _ = _slopes(ctx, "ball", 3, SWEEP_Q)
    s = fit_slope(DK)
    norm = [v / (q * math.log(q)) for q, v in DK]
    spread = max(norm) / min(norm)
    return s <= 1.5 and spread <= 4, f"slope D_K={s:.3f}, spread D_K/(q log q)={spread:.3f}"


def c5_distinct(ctx):
    ok, parts = True, []
    for spec, d, f in (("ball", 4, lambda q: q**2), ("ellipsoid:2,1,1,1", 4, lambda q: q**2),
                       ("ball", 3, lambda q: q**2 / math.log(q) ** 2)):
        r = [int(np.count_nonzero(ctx.profile(spec, d, q).counts)) / f(q) for q in SWEEP_Q]
        c0 = r[0]
        ok &= min(r) >= c0 / 2
        parts.append(f"{spec} d={d}: c0={c0:.3f} min={min(r):.3f}")
    return ok, "; ".join(parts)


def c6_l1(ctx):
    bodies = {2: ["ball", "ellipsoid:2,1", "superellipsoid:4", "radial:0.1:1"],
              3: ["ball", "ellipsoid:2,1,1", "superellipsoid:4", "radial:0.1:1"],
              4: ["ball", "ellipsoid:2,1,1,1", "superellipsoid:4", "radial:0.1:1"]}
    qs = {2: (32, 64), 3: (32, 64), 4: (32,)}
    worst, where = 0.0, ""
    for d, specs in bodies.items():
        for spec in specs:
            for q in qs[d]:
                ratio = l1_mass(ctx.profile(spec, d, q))[1] / ctx.volume_factor
                if abs(ratio - 1) >= worst:
                    worst, where = abs(ratio - 1), f"{spec} d={d} q={q} ratio={ratio:.4f}"
    return worst <= 0.05, f"max |ratio-1|={worst:.4f} at {where}"


def _sweep_profiles(ctx):
    c3_mean_square_d4(ctx)
    c4_mean_square_d3(ctx)
    return ctx.all_profiles()


def c7_lower_bound(ctx):
    worst = math.inf
    for (spec, d, q, _), prof in _sweep_profiles(ctx):
        vol = prof.volume / ctx.volume_factor
        worst = min(worst, l2_weighted_nu(prof) / (vol * q**d))
    return worst >= 0.1, f"min l2nu/(Vol q^d)={worst:.3f} over {len(ctx.all_profiles())} profiles"


def c8_cauchy_schwarz(ctx):
    profs = _sweep_profiles(ctx)
    bad = [k for k, p in profs if not (lambda t: t[0] <= t[1])(cauchy_schwarz_support(p))]
    return not bad, f"{len(profs) - len(bad)}/{len(profs)} profiles satisfy (sum)^2 <= occ * sum sq"


def c9_hankel(ctx):
    worst_iso = worst_self = 0.0
    for v in (0.0, 0.5, 1.0, 1.5, 2.0):
        t = np.linspace(0.0, 12.0, 3001)
        g = t ** (v + 0.5) * np.exp(-t * t) * (1 + t * t)
        H = hankel_transform(t, g, v, r_max=16.0)
        worst_iso = max(worst_iso, abs(l2_norm(H.x, H.values) / l2_norm(t, g) - 1))
        f = t ** (v + 0.5) * np.exp(-t * t / 2)
        F = hankel_transform(t, f, v)
        ref = F.x ** (v + 0.5) * np.exp(-F.x**2 / 2)
        worst_self = max(worst_self, float(np.max(np.abs(F.values - ref))) / float(np.max(np.abs(ref))))
    return (worst_iso <= 1e-3 and worst_self <= 1e-3,
            f"isometry err={worst_iso:.2e}, self-reciprocal err={worst_self:.2e}")


def c10_poisson(ctx):
    body, q, t = parse_body("ball", 2), 16, [3.1, 7.7]
    cut = build_cutoff(0.4, 2)
    if not smoothing_is_exact(body, q, cut, t):
        return False, "precondition failed: a lattice point lies within the bump radius"
    direct = poisson_direct(body, q, cut, t)
    series = [poisson_series(body, q, cut, "E", t, R) for R in (q, 2 * q, 4 * q, 8 * q)]
    gaps = convergence_gaps(series, direct)
    mono = bool(np.all(np.diff(gaps, axis=0) < 0))
    final = float(gaps[-1].max())
    return mono and final <= 0.10, (f"gaps t=3.1: {', '.join(map(_fmt, gaps[:, 0]))}; "
                                    f"t=7.7: {', '.join(map(_fmt, gaps[:, 1]))}")


def _bessel_extrema(v, lo, hi):
    f = lambda x: -bessel_j(v + 1, x) + (v / x) * bessel_j(v, x)
    xs = np.linspace(lo, hi, 4000)
    fv = f(xs)
    idx = np.flatnonzero(np.sign(fv[:-1]) != np.sign(fv[1:]))
    return np.array([brentq(f, xs[i], xs[i + 1]) for i in idx])


def c11_asymptotics(ctx):
    body = parse_body("ellipsoid:1.5,1")
    fit_correction(body, "surface", band=(10.0, 40.0))
    angles = np.linspace(0, np.pi, 7, endpoint=False) + 0.1  # off the calibration grid
    ext_err = band_lead = band_two = 0.0
    for a in angles:
        th = np.array([np.cos(a), np.sin(a)])
        h = float(body.support(th))
        # relative error at extrema of the leading Bessel factor
        r_ext = _bessel_extrema(0.0, 2 * np.pi * h * 10, 2 * np.pi * h * 40) / (2 * np.pi * h)
        xi = r_ext[:, None] * th
        direct = np.array([ft_body_direct(body, z, "surface").real for z in xi])
        lead = ft_body_asymptotic(body, xi, "surface", "leading")
        ext_err = max(ext_err, float(np.max(np.abs(lead - direct) / np.abs(direct))))
        # error across the band, in units of the local envelope
        r = np.linspace(10.0, 40.0, 241)
        xi = r[:, None] * th
        direct = np.array([ft_body_direct(body, z, "surface").real for z in xi])
        kappa = curvature_many(body, th[None])[0]
        env = 2 * np.pi * math.sqrt(h / kappa) * np.sqrt(1.0 / (np.pi**2 * h * r))
        for order in ("leading", "two-term"):
            e = float(np.max(np.abs(ft_body_asymptotic(body, xi, "surface", order) - direct) / env))
            if order == "leading":
                band_lead = max(band_lead, e)
            else:
                band_two = max(band_two, e)
    return (ext_err <= 0.10 and band_two < band_lead,
            f"extrema err={ext_err:.2e}; band max err leading={band_lead:.2e}, two-term={band_two:.2e}")


def c12_mattila(ctx):
    body = parse_body("ball", 3)
    cut = build_cutoff(0.4, 3)
    ratios = []
    for q in (8, 16, 32):
        m = mattila_integral(body, q, cut, budget=ctx.budget, threads=ctx.threads)
        ratios.append(m / l2_weighted_nu(ctx.profile("ball", 3, q)))
    ok = all(0.25 <= r <= 4 for r in ratios) and max(ratios) / min(ratios) <= 2
    return ok, "ratios " + ", ".join(map(_fmt, ratios))


def c13_duality(ctx):
    ok, parts = True, []
    for spec, d in (("ellipsoid:2,1", 2), ("ellipsoid:2,1,1", 3)):
        body = parse_body(spec)
        cut = build_cutoff(0.4, d)
        ratios = []
        for q in (8, 16, 32):
            a, b = duality_l2(body, q, cut, budget=ctx.budget, threads=ctx.threads)
            ratios.append(a / b)
        ok &= all(1 / 3 <= r <= 3 for r in ratios) and max(ratios) / min(ratios) <= 2
        parts.append(f"{spec}: " + ", ".join(map(_fmt, ratios)))
    for d in (2, 3):
        a, b = duality_l2(parse_body("ball", d), 16, build_cutoff(0.4, d), budget=ctx.budget)
        ok &= a == b
        parts.append(f"ball d={d}: {a / b:.1f}")
    return ok, "; ".join(parts)


def c14_landau(ctx):
    ok, parts = True, []
    for d in (2, 3):
        r = [landau_envelope_ratio(ctx.profile("ball", d, q)) for q in (16, 32, 64)]
        ok &= max(r[1:]) <= 2 * r[0]
        parts.append(f"d={d}: " + ", ".join(map(_fmt, r)))
    return ok, "; ".join(parts)


def c15_falconer(ctx):
    ok, parts = True, []
    for spec in ("ball", "ellipsoid:2,1,1,1"):
        body = parse_body(spec, 4)
        C = upper_bound_constant(body)
        res = [distance_set_measure(FalconerStage(q, 2.0, 4, body), budget=ctx.budget)
               for q in (8, 16, 32)]
        lows = [r.measure_lower for r in res]
        c = lows[0]
        bound_ok = all(r.measure_upper <= C * r.stage.ball_radius * r.stage.q**2 for r in res)
        ok &= min(lows) >= c / 3 and c > 0 and bound_ok
        sub = [distance_set_measure(FalconerStage(q, 1.6, 4, body), budget=ctx.budget)
               for q in (64, 128, 256, 512)]
        s_lo = fit_slope([(r.stage.q, r.measure_lower) for r in sub])
        s_hi = fit_slope([(r.stage.q, r.measure_upper) for r in sub])
        ok &= s_lo <= -0.3
        parts.append(f"{spec}: s=2 lower {', '.join(map(_fmt, lows))}, upper<=C bound {bound_ok}; "
                     f"s=1.6 slope lower={s_lo:.3f} upper={s_hi:.3f}")
    return ok, "; ".join(parts)


def c16_negative_control(ctx):
    bad = Context(threads=ctx.threads, budget=ctx.budget,
                  volume_factor=ctx.volume_factor if ctx.volume_factor != 1 else NEGATIVE_CONTROL_FACTOR)
    p3, d3 = c3_mean_square_d4(bad)
    p14, d14 = c14_landau(bad)
    return (not p3 and not p14,
            f"with Vol K x{bad.volume_factor}: criterion 3 {'passes' if p3 else 'fails'}, "
            f"criterion 14 {'passes' if p14 else 'fails'}")


CRITERIA: dict[int, tuple[str, Callable]] = {
    1: ("enumeration equals brute force", c1_oracle),
    2: ("Gauss circle spot values", c2_gauss_circle),
    3: ("mean-square discrepancy, d=4", c3_mean_square_d4),
    4: ("mean-square discrepancy, d=3", c4_mean_square_d3),
    5: ("distinct distances grow like q^2", c5_distinct),
    6: ("L1 mass of the distance measure", c6_l1),
    7: ("weighted L2 lower bound", c7_lower_bound),
    8: ("discrete Cauchy-Schwarz", c8_cauchy_schwarz),
    9: ("Hankel isometry and self-reciprocity", c9_hankel),
    10: ("Poisson series against lattice count", c10_poisson),
    11: ("stationary-phase asymptotics", c11_asymptotics),
    12: ("Mattila integral against L2 norm", c12_mattila),
    13: ("duality of K and K* norms", c13_duality),
    14: ("Landau envelope", c14_landau),
    15: ("Falconer distance-set measure", c15_falconer),
    16: ("negative control: corrupted volume", c16_negative_control),
}


def run_criteria(numbers=None, ctx: Context | None = None, progress=None) -> list[CriterionResult]:
    ctx = ctx or Context()
    numbers = sorted(CRITERIA) if numbers is None else list(numbers)
    out = []
    for n in numbers:
        if n not in CRITERIA:
            raise KeyError(f"no criterion {n}")
        title, fn = CRITERIA[n]
        t0 = time.perf_counter()
        try:
            passed, detail = fn(ctx)
        except Exception as exc:  # a crash is a failure, reported in the table
            passed, detail = False, f"error: {type(exc).__name__}: {exc}"
        res = CriterionResult(n, title, bool(passed), detail, time.perf_counter() - t0)
        out.append(res)
        if progress:
            progress(res)
    return out


def format_line(r: CriterionResult) -> str:
    return f"[{'PASS' if r.passed else 'FAIL'}] {r.number:2d} {r.title}: {r.detail} ({r.seconds:.1f}s)"


def format_table(results) -> str:
    return "\n".join(format_line(r) for r in results)
