"""Command-line interface: ``expcone <subcommand> ...``.

Results go to stdout in machine-readable form (JSON, CBF, LP or CSV) and logs
go to stderr; ``EXPCONE_LOG`` sets the log level (default WARNING).  Exit codes:
0 on success, 2 for usage and input errors, 3 when a solver or numerical
procedure fails.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from typing import Optional, Sequence

from .errors import (ComputationError, ExpconeError, ProcedureError, SolverError)

log = logging.getLogger("expcone")

EXIT_OK, EXIT_USAGE, EXIT_SOLVER = 0, 2, 3
_SOLVER_ERRORS = (SolverError, ProcedureError, ComputationError)
SCHEME_CHOICES = ("phi1", "phi2", "phi3", "limit", "taylor", "limit_shift", "taylor_shift")


class UsageError(Exception):
    """Inconsistent command-line arguments."""


def _configure_logging() -> None:
    level = os.environ.get("EXPCONE_LOG", "WARNING").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", force=True)


def _read_model(path: str):
    from .bench.formats import parse_json

    text = sys.stdin.read() if path == "-" else open(path).read()
    return parse_json(text)


def _write(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _scheme_from_args(args, M: float):
    from .lift import SchemeSpec, certified_scheme

    if args.N is None:
        if args.eps is None:
            raise UsageError("give --N or --eps to fix the scheme size")
        return certified_scheme(args.scheme, M, args.eps, anchor=args.anchor, delta=args.delta,
                                a=1.0 if args.a is None else args.a, s=1 if args.s is None else args.s)
    return SchemeSpec(args.scheme, args.N, a=args.a, s=args.s, anchor=args.anchor, delta=args.delta)


def _add_scheme_args(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--scheme", choices=SCHEME_CHOICES, required=required, help="approximation scheme")
    p.add_argument("--N", type=int, help="quadrature points or squaring levels")
    p.add_argument("--eps", type=float, help="target accuracy; picks the smallest certified N")
    p.add_argument("--s", type=int, help="tower depth (phi2) or Taylor half-order")
    p.add_argument("--a", type=float, help="phi1 parameter a")
    p.add_argument("--anchor", type=float, help="phi3 anchor x_hat or exp-form shift")
    p.add_argument("--delta", type=float, help="certified radius around the anchor")


# ---------------------------------------------------------------------------
# Subcommands


def cmd_gen(args) -> int:
    from .bench.formats import emit_json
    from .bench.generators import InstanceSpec, gen_slr, generate, load_csv, synthetic_slr

    if args.family == "slr":
        if args.csv is not None:
            X, y, _ = load_csv(args.csv, args.label)
        elif args.samples is not None and args.features is not None:
            X, y = synthetic_slr(args.samples, args.features, args.seed)
        else:
            raise UsageError("gen slr needs --csv, or --samples and --features")
        model = gen_slr(X, y, args.lam, args.k, kernel_expand=args.kernel)
    else:
        if args.n is None:
            raise UsageError(f"gen {args.family} needs --n")
        m = args.m if args.m is not None else 0
        model = generate(InstanceSpec(args.family, args.n, m, args.p, args.t, args.seed))
    _write(emit_json(model), args.out)
    return EXIT_OK


def cmd_reformulate(args) -> int:
    from .bench.formats import emit
    from .lift import best_scale, reformulate
    from .solve.driver import SEED_EPS, polyhedral_model

    model = _read_model(args.model)
    if args.outer:
        if args.scheme is not None:
            raise UsageError("--outer and --scheme are exclusive")
        out = polyhedral_model(model, args.eps if args.eps is not None else SEED_EPS)
    elif args.scheme is None:
        if args.best_scale:
            raise UsageError("--best-scale needs --scheme")
        out = model
    else:
        scheme = _scheme_from_args(args, model.domain_M)
        anchors = None
        if args.best_scale:
            res = best_scale(model, time_limit=args.pilot_time, log_form=scheme.is_log)
            anchors = res.anchors
            log.info("best_scale anchors: %s", anchors)
        out = reformulate(model, scheme, anchors)
    _write(emit(out, args.emit), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .lift import AccuracyReport, verify_sandwich

    scheme = _scheme_from_args(args, args.M)
    rep = verify_sandwich(scheme, args.M, args.grid)
    sys.stdout.write("scheme,N," + AccuracyReport.CSV_HEADER + "\n")
    sys.stdout.write(f"{scheme.kind},{scheme.N},{rep.csv_row()}\n")
    return EXIT_OK


def _result_json(res, extra: dict) -> str:
    def num(v: float):
        return None if not math.isfinite(v) else v

    data = {"status": res.status.value, "objective": num(res.objective), "bound": num(res.bound),
            "rel_gap": num(res.rel_gap), "nodes": res.nodes, "cuts": res.cuts_added,
            "seconds": res.elapsed, "incumbent": list(res.incumbent) if res.incumbent else None}
    data.update(extra)
    return json.dumps(data) + "\n"


def cmd_solve(args) -> int:
    from .solve.driver import solve_miecp

    model = _read_model(args.model)
    scheme = None
    if args.method == "soc-reformulate":
        if args.scheme is None:
            raise UsageError("--method soc-reformulate needs --scheme")
        scheme = _scheme_from_args(args, model.domain_M)
    elif args.scheme is not None:
        raise UsageError("--scheme only applies to --method soc-reformulate")
    # The solvers are deterministic; the seed is recorded for bookkeeping only.
    res = solve_miecp(model, args.method, scheme=scheme, tol_gap=args.gap, time_limit=args.time_limit,
                      node_limit=args.node_limit, backend=args.backend)
    sys.stdout.write(_result_json(res, {"method": args.method, "seed": args.seed}))
    return EXIT_OK


BENCH_COLUMNS = ("family", "n", "m", "p", "seed", "method", "status", "objective", "oracle",
                 "rel_gap", "bound", "bound_ok", "nodes", "cuts", "seconds")


def bench_instances(quick: bool):
    """Packing and covering instances of the end-to-end acceptance check."""
    from .bench.generators import InstanceSpec

    n_pack, n_cov = (3, 2) if quick else (20, 10)
    specs = [InstanceSpec("packing", 15, 10, 1 + s % 3, seed=s) for s in range(n_pack)]
    specs += [InstanceSpec("covering", 12, 10, 1 + s % 3, seed=s) for s in range(n_cov)]
    return specs


def cmd_bench(args) -> int:
    from .bench.generators import generate
    from .bench.oracle import brute_force_oracle
    from .solve.bnb import relative_gap
    from .solve.driver import branch_and_cut, cutting_plane

    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(BENCH_COLUMNS)
    methods = {"cutting-plane": cutting_plane, "branch-and-cut": branch_and_cut}
    worst = 0.0
    for spec in bench_instances(args.quick):
        model = generate(spec)
        oracle = brute_force_oracle(model)
        for name, fn in methods.items():
            t0 = time.perf_counter()
            res = fn(model, tol_gap=args.gap, time_limit=args.time_limit)
            secs = time.perf_counter() - t0
            gap = relative_gap(oracle, res.objective)
            bound_ok = res.bound <= oracle + 1e-9 * max(1.0, abs(oracle))
            worst = max(worst, gap)
            writer.writerow([spec.family, spec.n, spec.m, spec.p, spec.seed, name, res.status.value,
                             repr(res.objective), repr(oracle), repr(gap), repr(res.bound),
                             int(bound_ok), res.nodes, res.cuts_added, f"{secs:.4f}"])
            sys.stdout.flush()
    log.info("bench: worst relative gap to oracle %.3g", worst)
    return EXIT_OK


def cmd_coeffs(args) -> int:
    import mpmath

    from .exp_schemes import sos_coefficients

    dec = sos_coefficients(args.s, exact=False if args.float else None)

    def fmt(v) -> str:
        if dec.exact:
            return str(v)
        return mpmath.nstr(v, args.digits)

    sys.stdout.write("j,alpha,beta\n")
    for j, (a, b) in enumerate(zip(dec.alpha, dec.beta)):
        sys.stdout.write(f"{j},{fmt(a)},{fmt(b)}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="expcone", description="Exponential cone approximation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a benchmark instance as JSON")
    p.add_argument("family", choices=("packing", "covering", "slr"))
    p.add_argument("--n", type=int, help="number of x columns")
    p.add_argument("--m", type=int, help="number of linear rows")
    p.add_argument("--p", type=int, default=1, help="number of cones")
    p.add_argument("--t", type=int, help="number of binary columns (default n)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="SLR data file (header optional, label column last unless --label)")
    p.add_argument("--label", help="SLR label column name")
    p.add_argument("--samples", type=int, help="synthetic SLR sample count")
    p.add_argument("--features", type=int, help="synthetic SLR feature count")
    p.add_argument("--lam", type=float, default=0.1, help="SLR L1 weight")
    p.add_argument("--k", type=int, default=1, help="SLR support size")
    p.add_argument("--kernel", action="store_true", help="append pairwise feature products")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("reformulate", help="replace exponential cones and emit the model")
    p.add_argument("model", help="model JSON file, or - for stdin")
    _add_scheme_args(p, required=False)
    p.add_argument("--outer", action="store_true", help="emit the polyhedral outer MILP (uses --eps)")
    p.add_argument("--best-scale", action="store_true", help="per-cone anchors from a pilot solve")
    p.add_argument("--pilot-time", type=float, default=2.0, help="time limit of the pilot solve")
    p.add_argument("--emit", choices=("cbf", "lp", "json"), default="cbf")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_reformulate)

    p = sub.add_parser("verify", help="grid check of a scheme's sandwich certificate (CSV)")
    _add_scheme_args(p, required=True)
    p.add_argument("--M", type=float, default=16.0, help="domain parameter M")
    p.add_argument("--grid", type=int, default=2000)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("solve", help="solve a model JSON; prints a JSON result")
    p.add_argument("model", help="model JSON file, or - for stdin")
    p.add_argument("--method", choices=("cutting-plane", "branch-and-cut", "soc-reformulate"),
                   default="branch-and-cut")
    _add_scheme_args(p, required=False)
    p.add_argument("--gap", type=float, default=1e-4, help="relative gap tolerance")
    p.add_argument("--time-limit", type=float, default=math.inf)
    p.add_argument("--node-limit", type=int, default=100000)
    p.add_argument("--backend", choices=("simplex", "highs"), default="simplex")
    p.add_argument("--seed", type=int, default=0, help="recorded in the output")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="solve the oracle-checked instances; CSV of gaps and times")
    p.add_argument("--quick", action="store_true", help="5 instances instead of 30")
    p.add_argument("--gap", type=float, default=1e-4)
    p.add_argument("--time-limit", type=float, default=60.0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("coeffs", help="SOS coefficients of the even Taylor polynomial (CSV)")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--float", action="store_true", help="force 128-bit floating point")
    p.add_argument("--digits", type=int, default=17, help="digits printed in floating mode")
    p.set_defaults(func=cmd_coeffs)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"expcone: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _SOLVER_ERRORS as exc:
        print(f"expcone: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ExpconeError, OSError) as exc:
        print(f"expcone: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
