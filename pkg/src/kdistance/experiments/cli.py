"""Command-line entry point: ``kdistance <subcommand> [options]``.

Exit codes: 0 ok, 1 criterion failure, 2 configuration error,
3 point budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import sys

from ..convex_body import BodyError
from ..distance_measure import (build_profile, l2_weighted_N, l2_weighted_nu,
                                landau_envelope_ratio, mean_square, write_profile_csv)
from ..falconer import FalconerStage, distance_set_measure, distinct_gauges, write_falconer_csv
from ..lattice import (BudgetExceeded, DEFAULT_BUDGET, distinct_distances, enumerate_count,
                       shell_histogram, write_histogram_csv)
from ..spectral.cutoff import DEFAULT_R0, build_cutoff
from ..spectral.series import (duality_l2, mattila_integral, poisson_direct, poisson_series,
                               write_mattila_csv, write_series_csv)
from .config import ConfigError, ExperimentConfig, load_config
from .criteria import Context, format_line, run_criteria
from .sweep import make_body, run_sweep

EXIT_OK, EXIT_CRITERION, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _common(p, suppress):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--config", metavar="PATH", default=default(None), help="flat key = value config file")
    p.add_argument("--out", metavar="PATH", default=default(None), help="CSV output path")
    p.add_argument("--threads", type=int, metavar="N", default=default(None), help="worker threads")
    p.add_argument("--budget", type=int, metavar="POINTS", default=default(None),
                   help=f"max lattice points per enumeration (default {DEFAULT_BUDGET})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kdistance", description=__doc__.splitlines()[0])
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        _common(p, suppress=True)
        return p

    def body_args(p, q_list=False):
        p.add_argument("--body", default="ball", help="ball | ellipsoid:a1,..,ad | superellipsoid:p[:a..] | radial:eps:seed")
        p.add_argument("--d", type=int, default=None, help="dimension (implied by explicit axes)")
        if q_list:
            p.add_argument("--q", type=_ints, default=[8, 16, 32], help="comma-separated q values")
        else:
            p.add_argument("--q", type=float, required=True)

    p = add("enumerate", "count nonzero lattice points in qK; --out writes the shell histogram")
    body_args(p)
    p.add_argument("--delta", type=float, default=None)

    p = add("profile", "distance measure and discrepancy profile (CSV)")
    body_args(p)
    p.add_argument("--delta", type=float, default=None)

    p = add("discrepancy", "mean-square discrepancies and related statistics")
    body_args(p)

    p = add("distances", "distinct K-distances from the origin")
    body_args(p)

    p = add("poisson", "Poisson-side series for the smoothed discrepancy")
    body_args(p)
    p.add_argument("--t", type=_floats, required=True, help="comma-separated t values in (1/q, q-1/q)")
    p.add_argument("--R", type=_floats, default=None, help="truncation radii (default q,2q,4q,8q)")
    p.add_argument("--mode", choices=["nu", "E"], default="E")
    p.add_argument("--r0", type=float, default=DEFAULT_R0)

    p = add("mattila", "Mattila integral against the weighted L2 norm")
    body_args(p, q_list=True)
    p.add_argument("--r0", type=float, default=DEFAULT_R0)

    p = add("duality", "cutoff-weighted L2 norms for K and its dual")
    body_args(p, q_list=True)
    p.add_argument("--r0", type=float, default=DEFAULT_R0)

    p = add("falconer", "measure of the K-distance set of a Falconer stage")
    body_args(p, q_list=True)
    p.add_argument("--s", type=float, required=True)

    add("sweep", "statistics over the (d, q, body) grid of a config file")

    p = add("check", "run the acceptance criteria")
    p.add_argument("--criteria", type=_ints, default=None, help="comma-separated subset (empty for none)")
    p.add_argument("--corrupt-volume", type=float, default=None, metavar="FACTOR",
                   help="test hook: multiply Vol K by FACTOR in every profile")
    return parser


def _settings(args):
    cfg = load_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    threads = args.threads if getattr(args, "threads", None) else cfg.threads
    budget = args.budget if getattr(args, "budget", None) else cfg.budget
    if threads < 1 or budget < 1:
        raise ConfigError("threads and budget must be positive")
    return cfg, threads, budget


def _body(args):
    return make_body(args.body, args.d)


def _emit(rows, header, out):
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    finally:
        if out:
            fh.close()


def cmd_enumerate(args, cfg, threads, budget):
    body = _body(args)
    if args.out:
        h = shell_histogram(body, args.q, delta=args.delta, budget=budget, threads=threads)
        write_histogram_csv(h, args.out)
        n = h.total
    else:
        n = enumerate_count(body, args.q, budget=budget, threads=threads)
    print(f"{body} d={body.d} q={args.q}: {n} nonzero points, {n + 1} with the origin")


def cmd_profile(args, cfg, threads, budget):
    body = _body(args)
    prof = build_profile(shell_histogram(body, args.q, delta=args.delta, budget=budget,
                                         threads=threads), body)
    if args.out:
        write_profile_csv(prof, args.out)
    else:
        _emit(zip(prof.t, prof.nu0, prof.N0, prof.E0, prof.nu_w, prof.E_w),
              ["t", "nu0", "N0", "E0", "nu_w", "E_w"], None)


def cmd_discrepancy(args, cfg, threads, budget):
    body = _body(args)
    hist = shell_histogram(body, args.q, budget=budget, threads=threads)
    prof = build_profile(hist, body)
    D_A, D_K = mean_square(prof)
    l2N = l2_weighted_N(prof)[0] if body.d >= 3 else float("nan")
    row = [body.d, args.q, str(body), prof.total, D_A, D_K, l2_weighted_nu(prof), l2N,
           distinct_distances(hist), landau_envelope_ratio(prof)]
    _emit([row], ["d", "q", "body", "total", "D_A", "D_K", "l2nu", "l2N", "distinct", "landau_ratio"],
          args.out)


def cmd_distances(args, cfg, threads, budget):
    body = _body(args)
    hist = shell_histogram(body, args.q, budget=budget, threads=threads)
    vals, exact = distinct_gauges(body, args.q, budget=budget)
    exact_n = len(vals) if exact else ""
    _emit([[body.d, args.q, str(body), distinct_distances(hist), exact_n]],
          ["d", "q", "body", "occupied_buckets", "exact_distinct"], args.out)


def cmd_poisson(args, cfg, threads, budget):
    body = _body(args)
    cut = build_cutoff(args.r0, body.d)
    Rs = args.R or [args.q * k for k in (1, 2, 4, 8)]
    series = [poisson_series(body, args.q, cut, args.mode, args.t, R, budget=budget, threads=threads)
              for R in Rs]
    if args.out:
        write_series_csv(series, args.out)
    else:
        _emit([[t, v, s.R] for s in series for t, v in zip(s.t, s.values)], ["t", "value", "R"], None)
    if args.mode == "E":
        direct = poisson_direct(body, args.q, cut, args.t, budget=budget)
        for t, v in zip(args.t, direct):
            print(f"# lattice side at t={t}: {v!r}", file=sys.stderr)


def cmd_mattila(args, cfg, threads, budget):
    body = _body(args)
    cut = build_cutoff(args.r0, body.d)
    rows = []
    for q in args.q:
        m = mattila_integral(body, q, cut, budget=budget, threads=threads)
        l2 = l2_weighted_nu(build_profile(shell_histogram(body, q, budget=budget, threads=threads), body))
        rows.append((q, body.d, str(body), m, l2))
    if args.out:
        write_mattila_csv(rows, args.out)
    else:
        _emit([r + (r[3] / r[4],) for r in rows], ["q", "d", "body", "mattila", "l2nu", "ratio"], None)


def cmd_duality(args, cfg, threads, budget):
    body = _body(args)
    cut = build_cutoff(args.r0, body.d)
    rows = []
    for q in args.q:
        a, b = duality_l2(body, q, cut, budget=budget, threads=threads)
        rows.append([q, body.d, str(body), a, b, a / b])
    _emit(rows, ["q", "d", "body", "normK", "normKstar", "ratio"], args.out)


def cmd_falconer(args, cfg, threads, budget):
    body = _body(args)
    res = [distance_set_measure(FalconerStage(q, args.s, body.d, body), budget=budget, threads=threads)
           for q in args.q]
    if args.out:
        write_falconer_csv(res, args.out)
    else:
        _emit([[r.stage.q, r.stage.s, r.stage.d, str(body), r.measure_lower, r.measure_upper,
                r.distinct_lower, r.stage.ball_radius] for r in res],
              ["q", "s", "d", "body", "measure_lower", "measure_upper", "distinct", "ball_radius"], None)


def cmd_sweep(args, cfg, threads, budget):
    if not getattr(args, "config", None):
        raise ConfigError("sweep needs --config")
    cfg.threads, cfg.budget = threads, budget
    out = args.out or "sweep.csv"
    report = run_sweep(cfg, out, progress=lambda r: print(
        f"d={r.d} q={r.q} {r.body}: total={r.total} D_K={r.D_K:.4g}" + (f" [{r.error}]" if r.error else ""),
        flush=True))
    for (d, body, stat), s in sorted(report.slopes.items()):
        print(f"slope d={d} {body} {stat}: {s:.3f}")
    print(f"rows written to {out}")


def cmd_check(args, cfg, threads, budget):
    numbers = args.criteria if args.criteria is not None else cfg.criteria
    ctx = Context(threads=threads, budget=budget, volume_factor=args.corrupt_volume or 1.0)
    results = run_criteria(numbers, ctx, progress=lambda r: print(format_line(r), flush=True))
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_CRITERION if failed else EXIT_OK


COMMANDS = {
    "enumerate": cmd_enumerate, "profile": cmd_profile, "discrepancy": cmd_discrepancy,
    "distances": cmd_distances, "poisson": cmd_poisson, "mattila": cmd_mattila,
    "duality": cmd_duality, "falconer": cmd_falconer, "sweep": cmd_sweep, "check": cmd_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg, threads, budget = _settings(args)
        status = COMMANDS[args.command](args, cfg, threads, budget)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, BodyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK if status is None else status


if __name__ == "__main__":
    sys.exit(main())
