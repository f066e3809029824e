"""Command-line entry point: ``nopo {point,sweep,analytic,dressed,verify}``.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 verification failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__, analytic
from .fock import ModeCutoffs
from .model import SystemParams
from .sweep import (ENGINES, NUMERICAL_ERRORS, ConfigError, NoConvergence, PointError,
                    SweepConfig, _converge, _run_point, emit, run_sweep)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VERIFY = 0, 2, 3, 4


def _add_param_flags(parser):
    d = SystemParams()
    parser.add_argument("--delta-a", type=float, default=math.sqrt(3) * d.g,
                        help="mode-a detuning (default sqrt(3) g)")
    parser.add_argument("--delta-b", type=float, default=None)
    parser.add_argument("--delta-c", type=float, default=None)
    parser.add_argument("--delta", type=float, default=None,
                        help="set delta_b = delta_c; default g**2 / (2 delta_a)")
    parser.add_argument("--g", type=float, default=d.g)
    parser.add_argument("--E", type=float, default=d.E)
    parser.add_argument("--kappa-a", type=float, default=d.kappa_a)
    parser.add_argument("--kappa", type=float, default=None,
                        help="set kappa_b = kappa_c")
    parser.add_argument("--kappa-b", type=float, default=d.kappa_b)
    parser.add_argument("--kappa-c", type=float, default=d.kappa_c)


def _params_from_args(args) -> SystemParams:
    kb = args.kappa if args.kappa is not None else args.kappa_b
    kc = args.kappa if args.kappa is not None else args.kappa_c
    if args.delta is not None:
        db = dc = args.delta
    elif args.delta_b is None and args.delta_c is None:
        db = dc = analytic.optimal_delta(args.delta_a, args.g)
    else:
        db = args.delta_b if args.delta_b is not None else 0.0
        dc = args.delta_c if args.delta_c is not None else 0.0
    return SystemParams(delta_a=args.delta_a, delta_b=db, delta_c=dc, g=args.g, E=args.E,
                        kappa_a=args.kappa_a, kappa_b=kb, kappa_c=kc)


def _print_json(obj):
    print(json.dumps(obj, indent=2))


def cmd_point(args) -> int:
    p = _params_from_args(args)
    q = p.normalized()
    cutoffs = ModeCutoffs(*args.cutoffs)
    try:
        if args.converge and args.engine == "master-equation":
            try:
                cutoffs, rep, res = _converge(q, cutoffs, args.rel_tol, args.cap)
            except NUMERICAL_ERRORS as exc:
                raise PointError(q, exc) from exc
        else:
            rep, res = _run_point(q, args.engine, cutoffs)
    except (PointError, NoConvergence) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _print_json({"params": p.as_dict(), "engine": args.engine,
                 "cutoffs": list(cutoffs.as_tuple()), "residual": res,
                 "report": rep.as_dict()})
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = SweepConfig.from_json(args.config)
    if args.engine:
        config = SweepConfig(config.base, config.axes, config.constraint, args.engine,
                             config.cutoffs, config.convergence)
    result = run_sweep(config, workers=args.workers)
    text = emit(result, args.format, args.out)
    if args.out is None:
        sys.stdout.write(text)
    failed = sum(row.error is not None for row in result.rows)
    if failed:
        print(f"{failed} of {len(result.rows)} points failed", file=sys.stderr)
    return EXIT_OK


def cmd_analytic(args) -> int:
    p = _params_from_args(args)
    kappa_D = args.kappa_D if args.kappa_D is not None else p.kappa_b + p.kappa_c
    kappa = kappa_D / 2
    try:
        out = {
            "params": p.as_dict(),
            "g2_D": analytic.g2_pair_analytic(p),
            "n_D": analytic.pair_number_analytic(p),
            "resonance_residual": analytic.resonance_condition_check(
                p.delta_a, (p.delta_b + p.delta_c) / 2, p.g),
            "kappa_D": kappa_D,
            "g2_D_optimal_curve": analytic.g2_on_optimal_curve(p.delta_a, p.g, p.kappa_a, kappa_D),
            "delta_a_opt_closed_form": analytic.optimal_delta_a(p.g, p.kappa_a, kappa),
            "delta_a_opt_numerical": analytic.minimize_g2_on_optimal_curve(
                p.g, p.kappa_a, kappa_D)[0],
        }
    except (analytic.DegenerateDenominator, ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _print_json(out)
    return EXIT_OK


def cmd_dressed(args) -> int:
    levels = analytic.dressed_energies(args.omega_a, args.omega_b, args.omega_c, args.g)
    out = {
        "e1_plus": levels.e1_plus, "e1_minus": levels.e1_minus,
        "e2_plus": levels.e2_plus, "e2_zero": levels.e2_zero, "e2_minus": levels.e2_minus,
        "two_manifold_available": levels.two_manifold_available,
    }
    _print_json(out)
    return EXIT_OK


def verification_points(n: int, seed: int = 20240601) -> list[SystemParams]:
    """Fixed reference point plus ``n - 1`` random points on the optimal curve."""
    points = [SystemParams.on_optimal_curve(math.sqrt(3) * 10.0)]
    rng = np.random.default_rng(seed)
    for _ in range(n - 1):
        g = rng.uniform(1.0, 20.0)
        points.append(SystemParams.on_optimal_curve(rng.uniform(0.5, 5.0) * g, g=g))
    return points


def cross_engine_disagreement(p: SystemParams, cutoffs: ModeCutoffs) -> dict:
    """Pairwise relative differences of n_D and g2_D between the three engines."""
    reps = {e: _run_point(p, e, cutoffs)[0] for e in ENGINES}
    out = {}
    for x, y in (("master-equation", "weak-drive"), ("master-equation", "analytic"),
                 ("weak-drive", "analytic")):
        for field in ("n_D", "g2_D"):
            a, b = getattr(reps[x], field), getattr(reps[y], field)
            out[f"{field}:{x}/{y}"] = abs(a - b) / max(abs(a), abs(b))
    return out


def cmd_verify(args) -> int:
    cutoffs = ModeCutoffs(*args.cutoffs)
    worst = 0.0
    exact_worst = 0.0
    failures = 0
    for p in verification_points(args.points):
        try:
            diffs = cross_engine_disagreement(p, cutoffs)
        except PointError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        oracle = max(v for k, v in diffs.items() if "master-equation" in k)
        exact = max(v for k, v in diffs.items() if "master-equation" not in k)
        ok = oracle <= args.rel_tol and exact <= 1e-10
        failures += not ok
        worst, exact_worst = max(worst, oracle), max(exact_worst, exact)
        if not ok or args.verbose:
            print(f"{'ok  ' if ok else 'FAIL'} delta_a={p.delta_a:.6g} g={p.g:.6g} "
                  f"master-eq vs closed form {oracle:.3g}, weak-drive vs closed form {exact:.3g}")
    print(f"{args.points - failures}/{args.points} points agree; worst master-equation "
          f"deviation {worst:.3g} (tol {args.rel_tol:g}), worst weak-drive/closed-form "
          f"deviation {exact_worst:.3g} (tol 1e-10)")
    return EXIT_OK if failures == 0 else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nopo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    pt = sub.add_parser("point", help="observables at one parameter point")
    _add_param_flags(pt)
    pt.add_argument("--engine", choices=ENGINES, default="master-equation")
    pt.add_argument("--cutoffs", type=int, nargs=3, default=list(ModeCutoffs().as_tuple()),
                    metavar=("NA", "NB", "NC"))
    pt.add_argument("--converge", action="store_true",
                    help="grow the cutoffs until n_D and g2_D settle")
    pt.add_argument("--rel-tol", type=float, default=1e-3)
    pt.add_argument("--cap", type=int, default=12)
    pt.set_defaults(func=cmd_point)

    sw = sub.add_parser("sweep", help="grid sweep from a JSON config")
    sw.add_argument("config")
    sw.add_argument("--out", default=None, help="output file (default stdout)")
    sw.add_argument("--format", choices=("csv", "json"), default="csv")
    sw.add_argument("--workers", type=int, default=None)
    sw.add_argument("--engine", choices=ENGINES, default=None,
                    help="override the config's engine")
    sw.set_defaults(func=cmd_sweep)

    an = sub.add_parser("analytic", help="closed-form weak-drive results")
    _add_param_flags(an)
    an.add_argument("--kappa-D", type=float, default=None,
                    help="pair loss rate for the optimal-curve form (default kappa_b + kappa_c)")
    an.set_defaults(func=cmd_analytic)

    dr = sub.add_parser("dressed", help="dressed-state energies of the undriven oscillator")
    dr.add_argument("--omega-a", type=float, required=True)
    dr.add_argument("--omega-b", type=float, required=True)
    dr.add_argument("--omega-c", type=float, required=True)
    dr.add_argument("--g", type=float, required=True)
    dr.set_defaults(func=cmd_dressed)

    ve = sub.add_parser("verify", help="cross-check the three engines")
    ve.add_argument("--points", type=int, default=10)
    ve.add_argument("--rel-tol", type=float, default=0.1)
    ve.add_argument("--cutoffs", type=int, nargs=3, default=list(ModeCutoffs().as_tuple()),
                    metavar=("NA", "NB", "NC"))
    ve.add_argument("-v", "--verbose", action="store_true")
    ve.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
