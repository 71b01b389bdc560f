"""Command-line interface.

Exit codes: 0 success, 1 usage, 2 matrix parse error, 3 numerical failure
(see-saw budget exhausted without convergence).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time

import numpy as np

from dimwitness.classical import ENUMERATION_CAP, bgamma_classical, classical_max
from dimwitness.core import Strategy, optimal_alice, witness_dimension
from dimwitness.errors import CapacityError, DomainError, NumericalError
from dimwitness.families import bgamma_analytic, bgamma_matrix, chsh_matrix, zn_matrix
from dimwitness.optimizer import OptimizerConfig, analyze, detect_gaps, dimension_profile
from dimwitness.search import enumerate_classes, scan_records
from dimwitness.serialization import (
    MatrixParseError,
    dumps,
    envelope,
    format_matrix,
    parse_matrix,
    profile_csv,
    profile_to_json,
    report_to_json,
)
from dimwitness.sphere import (
    analytic_profile,
    analytic_sphere_strategy,
    analytic_Tn,
    sample_sphere_expression,
)
from dimwitness.tsirelson import realization_to_json, realize, verify_realization

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def default_jobs() -> int:
    env = os.environ.get("JOBS")
    if env and env.isdigit() and int(env) > 0:
        return int(env)
    return os.cpu_count() or 1


def _gap_pair(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'n,n+1'") from None
    return lo, hi


def _alphabet(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected a comma-separated list of numbers") from None


def _m_value(text: str):
    if text in ("inf", "infinity"):
        return math.inf
    return int(text)


def _optimizer_args(p, restarts=50):
    p.add_argument("--restarts", type=int, default=restarts)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-sweeps", type=int, default=10000)
    p.add_argument("--conv-tol", type=float, default=1e-11)
    p.add_argument("--tol-gap", type=float, default=1e-5)
    p.add_argument("--jobs", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dimwitness", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="dimension profile and gaps of a Bell matrix")
    p.add_argument("matrix", help="matrix file, or - for stdin")
    p.add_argument("--nmax", type=int, default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _optimizer_args(p)

    p = sub.add_parser("family", help="generate the built-in families")
    fam = p.add_subparsers(dest="family", required=True, parser_class=_Parser)
    q = fam.add_parser("bgamma")
    q.add_argument("--mb", type=int, required=True)
    q.add_argument("--gamma", type=float, required=True)
    q.add_argument("--emit", choices=("matrix", "report"), default="report")
    q.add_argument("--matrix-format", choices=("text", "json"), default="text")
    q = fam.add_parser("zn")
    q.add_argument("--mb", type=int, required=True)
    q.add_argument("--matrix-format", choices=("text", "json"), default="text")
    q = fam.add_parser("chsh")
    q.add_argument("--matrix-format", choices=("text", "json"), default="text")

    p = sub.add_parser("sphere", help="continuum sphere expression")
    sph = p.add_subparsers(dest="sphere", required=True, parser_class=_Parser)
    q = sph.add_parser("table")
    q.add_argument("--nmax", type=int, required=True)
    q.add_argument("--m", type=_m_value, default=math.inf)
    q = sph.add_parser("discretize")
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--points", type=int, required=True)
    q.add_argument("--nmax", type=int, required=True)
    _optimizer_args(q, restarts=10)

    p = sub.add_parser("realize", help="quantum realization of an optimal strategy")
    p.add_argument("matrix")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dump", action="store_true", help="include observable matrices")
    _optimizer_args(p)

    p = sub.add_parser("search", help="enumerate classes and scan for gaps")
    p.add_argument("--ma", type=int, required=True)
    p.add_argument("--mb", type=int, required=True)
    p.add_argument("--alphabet", type=_alphabet, default=(-1.0, 0.0, 1.0))
    p.add_argument("--flag-gap", type=_gap_pair, default=(3, 4))
    p.add_argument("--out", default=None, help="JSONL file with one record per class")
    p.add_argument("--keep-trivial", action="store_true")
    p.add_argument("--method", choices=("auto", "generate", "orderly"), default="auto")
    _optimizer_args(p, restarts=20)
    return parser


def _config(args, jobs: int | None = None) -> OptimizerConfig:
    return OptimizerConfig(restarts=args.restarts, max_sweeps=args.max_sweeps,
                           conv_tol=args.conv_tol, gap_tol=args.tol_gap, seed=args.seed,
                           jobs=jobs if jobs is not None else (args.jobs or default_jobs()))


def _config_echo(cfg: OptimizerConfig) -> dict:
    # jobs is excluded: it never changes results
    return {"restarts": cfg.restarts, "max_sweeps": cfg.max_sweeps, "conv_tol": cfg.conv_tol,
            "gap_tol": cfg.gap_tol, "seed": cfg.seed}


def _converged(profile) -> bool:
    return all(e.converged for e in profile.entries)


def cmd_analyze(args, out):
    expr = parse_matrix(args.matrix)
    cfg = _config(args)
    report = analyze(expr, args.nmax, cfg)
    if args.format == "csv":
        out.write(profile_csv(report.profile))
    else:
        payload = {"shape": list(expr.shape), "matrix": expr.entries, **report_to_json(report)}
        if expr.cols <= ENUMERATION_CAP:
            c = classical_max(expr)
            payload["classical"] = {"value": c.value, "argmax": list(c.argmax)}
        return payload, _config_echo(cfg), cfg.seed, _converged(report.profile)
    return None, None, None, _converged(report.profile)


def cmd_family(args, out):
    if args.family == "chsh":
        out.write(format_matrix(chsh_matrix(), args.matrix_format))
        return None, None, None, True
    if args.family == "zn":
        out.write(format_matrix(zn_matrix(args.mb), args.matrix_format))
        return None, None, None, True
    expr = bgamma_matrix(args.mb, args.gamma)
    if args.emit == "matrix":
        out.write(format_matrix(expr, args.matrix_format))
        return None, None, None, True
    fa = bgamma_analytic(args.mb, args.gamma)
    cl = bgamma_classical(args.mb, args.gamma)
    payload = {
        "m_b": args.mb, "m_a": expr.rows, "gamma": args.gamma,
        "T_max": fa.t_max, "x_star": fa.x_star,
        "classical": {"value": cl.value, "k_max": cl.k_max, "delta": cl.delta},
        "quantum_classical_ratio": fa.t_max / cl.value,
        "gap": {"n": args.mb - 1, "n_next": args.mb,
                "witness_dim": witness_dimension(args.mb - 1)} if args.mb >= 2 else None,
        "matrix": expr.entries,
    }
    return payload, {}, None, True


def cmd_sphere(args, out):
    if args.sphere == "table":
        if args.nmax < 1:
            raise UsageError("--nmax must be at least 1")
        prof = analytic_profile(args.m, args.nmax)
        t1 = analytic_Tn(args.m, 1)
        rows = [{"n": e.n, "T_n": e.value, "ratio": e.value / t1} for e in prof.entries]
        report = detect_gaps(prof, OptimizerConfig())
        m = "inf" if math.isinf(args.m) else args.m
        payload = {"m": m, "rows": rows, "gaps": report_to_json(report)["gaps"]}
        return payload, {"m": m, "nmax": args.nmax}, None, True
    cfg = _config(args)
    expr, _, y = sample_sphere_expression(args.m, args.points, args.seed)
    prof = dimension_profile(expr, args.nmax, cfg)
    rows = []
    for e in prof.entries:
        row = {"n": e.n, "value": e.value, "analytic": analytic_Tn(args.m, e.n),
               "converged": e.converged}
        if e.n <= args.m:
            bob = analytic_sphere_strategy(args.m, e.n, y)
            row["analytic_strategy_value"] = float(
                np.linalg.norm(expr.matrix @ bob, axis=1).sum())
        rows.append(row)
    payload = {"m": args.m, "points": args.points, "rows": rows}
    echo = {**_config_echo(cfg), "m": args.m, "points": args.points, "nmax": args.nmax}
    return payload, echo, cfg.seed, _converged(prof)


def cmd_realize(args, out):
    expr = parse_matrix(args.matrix)
    cfg = _config(args)
    prof = dimension_profile(expr, args.n, cfg)
    entry = prof[args.n]
    bob = entry.bob
    alice = optimal_alice(expr, bob)
    strategy = Strategy(alice, bob)
    r = realize(alice, bob)
    ver = verify_realization(r, expr, strategy)
    payload = {
        "n": args.n, "local_dim": r.local_dim, "optimized_value": entry.value,
        "realized_value": ver.realized_value, "vector_value": ver.vector_value,
        "residuals": {"correlation": ver.correlation_residual,
                      "involution": ver.involution_residual,
                      "anticommutator": ver.anticommutator_residual,
                      "hermiticity": ver.hermiticity_residual},
        "passed": ver.passed,
        "alice": alice.tolist(), "bob": np.asarray(bob).tolist(),
    }
    if args.dump:
        payload["realization"] = realization_to_json(r)
    return payload, _config_echo(cfg), cfg.seed, entry.converged and ver.passed


def cmd_search(args, out):
    cfg = _config(args, jobs=1)
    jobs = args.jobs or default_jobs()
    classes = list(enumerate_classes(args.ma, args.mb, args.alphabet,
                                     filter_trivial=not args.keep_trivial, method=args.method))
    sink = open(args.out, "w") if args.out else None
    hits, converged, scanned = [], True, 0
    try:
        # the all-zero class (kept with --keep-trivial) is not a Bell expression
        nonzero = [c for c in classes if any(c.key.entries)]
        for rec in scan_records(nonzero, args.flag_gap, cfg, jobs):
            scanned += 1
            converged &= _converged(rec.profile)
            if sink is not None:
                sink.write(json.dumps(rec.to_json(), allow_nan=False) + "\n")
            if rec.hit:
                hits.append({"matrix": rec.key.matrix().tolist(),
                             "profile": profile_to_json(rec.profile),
                             "witness_dim": rec.witness_dim})
    finally:
        if sink is not None:
            sink.close()
    payload = {"shape": [args.ma, args.mb], "alphabet": list(args.alphabet),
               "classes": len(classes), "scanned": scanned,
               "flag_gap": list(args.flag_gap), "hits": hits}
    echo = {**_config_echo(cfg), "method": args.method, "keep_trivial": args.keep_trivial}
    return payload, echo, cfg.seed, converged


COMMANDS = {"analyze": cmd_analyze, "family": cmd_family, "sphere": cmd_sphere,
            "realize": cmd_realize, "search": cmd_search}


def run_command(argv, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        err.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=err)
    start = time.perf_counter()
    try:
        payload, echo, seed, converged = COMMANDS[args.command](args, out)
    except MatrixParseError as exc:
        err.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except NumericalError as exc:
        err.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except (UsageError, DomainError, CapacityError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    if payload is not None:
        command = " ".join([args.command] + [a for a in (getattr(args, "family", None),
                                                         getattr(args, "sphere", None)) if a])
        out.write(dumps(envelope(command, seed, echo, payload,
                                 time.perf_counter() - start)) + "\n")
    if not converged:
        err.write("warning: see-saw budget exhausted without convergence\n")
        return EXIT_NUMERIC
    return EXIT_OK


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
