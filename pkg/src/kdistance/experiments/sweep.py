"""Parameter sweeps over (d, q, body) and log-log slope fits."""
from __future__ import annotations

import csv
import math
import os
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from ..convex_body import Body, parse_body
from ..distance_measure import (DistanceProfile, build_profile, cauchy_schwarz_support,
                                l2_weighted_N, l2_weighted_nu, mean_square)
from ..falconer import FalconerStage, distance_set_measure
from ..lattice import BudgetExceeded, distinct_distances, shell_histogram
from ..spectral.cutoff import build_cutoff
from ..spectral.series import duality_l2, mattila_integral
from .config import ExperimentConfig

__all__ = ["Row", "ExperimentReport", "fit_slope", "compute_row", "run_sweep", "make_body",
           "STAT_COLUMNS"]

STAT_COLUMNS = ["total", "D_A", "D_K", "l2nu", "l2N", "distinct", "support_size"]


@dataclass
class Row:
    d: int
    q: int
    body: str
    total: int = 0
    D_A: float = math.nan
    D_K: float = math.nan
    l2nu: float = math.nan
    l2N: float = math.nan
    distinct: int = 0
    support_size: int = 0
    mattila_ratio: float = math.nan
    duality_ratio: float = math.nan
    falconer_lower: float = math.nan
    falconer_upper: float = math.nan
    error: str = ""

    @classmethod
    def columns(cls):
        return [f.name for f in fields(cls)]

    def key(self):
        return (self.d, self.q, self.body)


@dataclass
class ExperimentReport:
    rows: list[Row] = field(default_factory=list)
    slopes: dict = field(default_factory=dict)  # (d, body, stat) -> slope
    header: dict = field(default_factory=dict)

    def series(self, d, body, stat):
        pts = [(r.q, getattr(r, stat)) for r in self.rows if r.d == d and r.body == body]
        return sorted((q, v) for q, v in pts if math.isfinite(v))


def fit_slope(points) -> float:
    """Least-squares slope of log(value) against log(q)."""
    pts = list(points)
    if len(pts) < 2:
        raise ValueError("need at least two points")
    q = np.array([p[0] for p in pts], dtype=float)
    v = np.array([p[1] for p in pts], dtype=float)
    if np.any(q <= 0) or np.any(v <= 0):
        raise ValueError("slope fit needs positive q and values")
    return float(np.polyfit(np.log(q), np.log(v), 1)[0])


def make_body(spec: str, d: int, seed: int | None = None) -> Body:
    body = parse_body(spec, d)
    if seed is not None:
        body.seed = int(seed)
    return body


def profile_for(body: Body, q: int, delta: float, *, budget: int, threads: int,
                volume: float | None = None) -> DistanceProfile:
    hist = shell_histogram(body, q, delta=delta, budget=budget, threads=threads)
    return build_profile(hist, body, volume=volume)


def compute_row(d: int, q: int, spec: str, cfg: ExperimentConfig) -> Row:
    body = make_body(spec, d, cfg.seed)
    row = Row(d=d, q=q, body=str(body))
    hist = shell_histogram(body, q, delta=cfg.delta(q), budget=cfg.budget, threads=cfg.threads)
    prof = build_profile(hist, body)
    row.total = prof.total
    row.D_A, row.D_K = mean_square(prof)
    row.l2nu = l2_weighted_nu(prof)
    if d >= 3:
        row.l2N = l2_weighted_N(prof)[0]
    row.distinct = distinct_distances(hist)
    row.support_size = cauchy_schwarz_support(prof)[2]
    try:
        if cfg.mattila or cfg.duality:
            cut = build_cutoff(cfg.r0, d)
            if cfg.mattila:
                row.mattila_ratio = mattila_integral(body, q, cut, budget=cfg.budget,
                                                     threads=cfg.threads) / row.l2nu
            if cfg.duality:
                a, b = duality_l2(body, q, cut, budget=cfg.budget, threads=cfg.threads)
                row.duality_ratio = a / b
        if cfg.falconer_s is not None:
            res = distance_set_measure(FalconerStage(q, cfg.falconer_s, d, body),
                                       budget=cfg.budget, threads=cfg.threads)
            row.falconer_lower, row.falconer_upper = res.measure_lower, res.measure_upper
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        # lattice statistics above stay valid
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def _read_rows(path) -> dict:
    done = {}
    if not os.path.exists(path):
        return done
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if reader.fieldnames != Row.columns():
        return {}
    for rec in reader:
        row = Row(**{f.name: _convert(f.type, rec[f.name]) for f in fields(Row)})
        done[row.key()] = row
    return done


def _convert(tp, val):
    if tp == "int":
        return int(val)
    if tp == "float":
        return float(val)
    return val


def _write_header(path, header):
    with open(path, "w", newline="") as fh:
        for k, v in header.items():
            fh.write(f"# {k}={v}\n")
        csv.writer(fh).writerow(Row.columns())


def _append_row(path, row):
    with open(path, "a", newline="") as fh:
        csv.writer(fh).writerow([repr(v) if isinstance(v, float) else v for v in asdict(row).values()])
        fh.flush()


def run_sweep(cfg: ExperimentConfig, out=None, *, progress=None) -> ExperimentReport:
    """Compute one row per (d, q, body); append each row to ``out`` as soon as
    it is done.  Rows already present in ``out`` are reused, so an
    interrupted sweep resumes where it stopped."""
    header = cfg.header()
    report = ExperimentReport(header=header)
    done = _read_rows(out) if out else {}
    if out and not done:
        _write_header(out, header)
    for d in cfg.dims:
        for spec in cfg.bodies:
            for q in cfg.qs:
                key = (d, q, str(make_body(spec, d)))
                if key in done:
                    report.rows.append(done[key])
                    continue
                try:
                    row = compute_row(d, q, spec, cfg)
                except (BudgetExceeded, ValueError, ArithmeticError, RuntimeError) as exc:
                    row = Row(d=d, q=q, body=key[2], error=f"{type(exc).__name__}: {exc}")
                report.rows.append(row)
                if out:
                    _append_row(out, row)
                if progress:
                    progress(row)
    _fit_all(report)
    return report


def _fit_all(report: ExperimentReport):
    groups = sorted({(r.d, r.body) for r in report.rows})
    for d, body in groups:
        for stat in STAT_COLUMNS:
            pts = [(q, v) for q, v in report.series(d, body, stat) if v > 0 and math.isfinite(v)]
            if len({q for q, _ in pts}) >= 3:
                report.slopes[(d, body, stat)] = fit_slope(pts)
