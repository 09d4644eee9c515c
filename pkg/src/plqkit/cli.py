"""Batch command-line interface.

Subcommands: validate, eval, deriv, certify, enumerate, copositive, absqp.
Reports are JSON on stdout (diagnostics on stderr); identical inputs give
byte-identical output except for the single excluded "timestamp" field.
Exit codes: 0 success, 1 verdict-negative, 2 input error, 3 guard
exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np

from ._config import DEFAULT
from .copositivity import (
    NOT_COPOSITIVE,
    absvalue_classify,
    absvalue_copositivity,
    copositive_on_cone,
    copositive_one_neg_eig,
)
from .errors import GuardExceeded, PlqError, SchemaError, WrongInertia
from .geometry import eigh_desc
from .optimality import (
    LOCAL_MIN,
    STRONG_LOCAL_MIN,
    enumerate_stationary_values,
    enumerate_strict_minima,
    plq_local_min,
    plq_strong_min,
)
from .plq import (
    gradient_pa_check,
    plq_dir1,
    plq_dir2,
    plq_eval,
    plq_validate,
)
from .problems import Problem, _matrix, _vector, cone_from_json, jsonable, load_problem
from .statmodels import assemble_objective

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_GUARD = 3


def _config_from(problem: Problem | None, args) -> "DEFAULT.__class__":
    cfg = DEFAULT
    opts = dict(problem.options) if problem is not None else {}
    if getattr(args, "tol", None) is not None:
        opts["tol"] = args.tol
    if getattr(args, "max_rows", None) is not None:
        opts["max_rows"] = args.max_rows
    if getattr(args, "max_pieces", None) is not None:
        opts["max_pieces"] = args.max_pieces
    kw = {}
    if "tol" in opts:
        kw["base_tol"] = float(opts["tol"])
    if "max_rows" in opts:
        mr = int(opts["max_rows"])
        kw.update(max_face_rows=mr, max_cone_rows=mr, max_polytope_rows=mr,
                  max_enum_rows=mr)
    if "max_pieces" in opts:
        mp = int(opts["max_pieces"])
        kw.update(max_maxmin_terms=mp, max_rep_pieces=mp,
                  max_composite_pieces=mp)
    return cfg.override(**kw) if kw else cfg


def _emit(report: dict, started: float) -> None:
    report["timestamp"] = {
        "iso": datetime.now(timezone.utc).isoformat(),
        "elapsed_seconds": time.monotonic() - started,
    }
    json.dump(jsonable(report), sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _point_args(args, problem: Problem | None):
    pts = []
    if getattr(args, "point", None):
        for text in args.point:
            pts.append(np.array([float(t) for t in text.split(",")]))
    elif problem is not None:
        pts = list(problem.points)
    if not pts:
        raise SchemaError("no query points: pass --point or a 'points' field")
    return pts


def _dir_args(args, problem: Problem | None):
    ds = []
    if getattr(args, "direction", None):
        for text in args.direction:
            ds.append(np.array([float(t) for t in text.split(",")]))
    elif problem is not None:
        ds = list(problem.directions)
    if not ds:
        raise SchemaError("no directions: pass --direction or a 'directions' field")
    return ds


def _require_plq(problem: Problem):
    if problem.plq is None:
        raise SchemaError("this command needs a 'plq' objective")
    return problem.plq


def cmd_validate(args) -> int:
    started = time.monotonic()
    problem = load_problem(args.problem)
    cfg = _config_from(problem, args)
    f = _require_plq(problem)
    rep = plq_validate(f, cfg)
    grad = gradient_pa_check(f, cfg)
    report = {
        "command": ["validate", str(args.problem)],
        "continuous": rep.continuous,
        "violations": [
            {"piece_i": i, "piece_j": j, "magnitude": m}
            for i, j, m in rep.violations
        ],
        "is_C1": grad.is_C1,
    }
    _emit(report, started)
    return EXIT_OK if rep.continuous else EXIT_NEGATIVE


def cmd_eval(args) -> int:
    started = time.monotonic()
    problem = load_problem(args.problem)
    cfg = _config_from(problem, args)
    pts = _point_args(args, problem)
    results = []
    for p in pts:
        if problem.plq is not None:
            results.append({"point": p, "value": plq_eval(problem.plq, p, None, cfg)})
        elif problem.pa is not None:
            results.append({"point": p, "value": problem.pa.value(p, cfg)})
        elif problem.ball is not None:
            results.append({"point": p, "value": problem.ball.value(p)})
        else:
            oracles = assemble_objective(problem.composite)
            results.append({"point": p, "value": oracles.value(p)})
    _emit({"command": ["eval", str(args.problem)], "results": results}, started)
    return EXIT_OK


def cmd_deriv(args) -> int:
    started = time.monotonic()
    problem = load_problem(args.problem)
    cfg = _config_from(problem, args)
    pts = _point_args(args, problem)
    dirs = _dir_args(args, problem)
    results = []
    for p in pts:
        for d in dirs:
            if problem.plq is not None:
                d1 = plq_dir1(problem.plq, p, d, cfg)
                d2 = plq_dir2(problem.plq, p, d, cfg)
            elif problem.ball is not None:
                d1 = problem.ball.dir1(p, d)
                d2 = problem.ball.dir2(p, d)
            elif problem.composite is not None:
                oracles = assemble_objective(problem.composite)
                d1 = oracles.dir1(p, d)
                try:
                    d2 = oracles.dir2(p, d)
                except PlqError:
                    d2 = None
            else:
                raise SchemaError("deriv supports plq, ball-example, composite")
            results.append({"point": p, "direction": d, "dir1": d1, "dir2": d2})
    _emit({"command": ["deriv", str(args.problem)], "results": results}, started)
    return EXIT_OK


def cmd_certify(args) -> int:
    started = time.monotonic()
    problem = load_problem(args.problem)
    cfg = _config_from(problem, args)
    f = _require_plq(problem)
    X = problem.default_constraints(f.n)
    pts = _point_args(args, problem)
    executor = ThreadPoolExecutor(args.threads) if args.threads > 1 else None
    try:
        results = []
        all_pass = True
        for p in pts:
            if args.level == "strong":
                cert = plq_strong_min(f, X, p, cfg, executor)
                want = STRONG_LOCAL_MIN
            else:
                cert = plq_local_min(f, X, p, cfg, executor)
                want = LOCAL_MIN
            passed = (cert.level == STRONG_LOCAL_MIN) if want == STRONG_LOCAL_MIN \
                else cert.is_local_min
            all_pass &= passed
            results.append({
                "point": p,
                "level": cert.level,
                "passed": passed,
                "refutation": cert.refutation,
                "pieces": [
                    {
                        "piece": ev.piece,
                        "verdict": ev.verdict.status if ev.verdict else None,
                        "min_value": ev.verdict.min_value if ev.verdict else None,
                        "witness": ev.verdict.witness if ev.verdict else None,
                        "multiplier": ev.kkt.multiplier if ev.kkt else None,
                        "support": list(ev.kkt.support) if ev.kkt else None,
                    }
                    for ev in cert.evidence
                ],
            })
    finally:
        if executor is not None:
            executor.shutdown()
    _emit({"command": ["certify", str(args.problem), "--level", args.level],
           "results": results}, started)
    return EXIT_OK if all_pass else EXIT_NEGATIVE


def cmd_enumerate(args) -> int:
    started = time.monotonic()
    problem = load_problem(args.problem)
    cfg = _config_from(problem, args)
    f = _require_plq(problem)
    X = problem.default_constraints(f.n)
    if args.what == "minima":
        found = enumerate_strict_minima(f, X, cfg)
        results = [
            {"point": x, "value": plq_eval(f, x, None, cfg), "level": cert.level}
            for x, cert in found
        ]
    else:
        results = [{"value": v} for v in enumerate_stationary_values(f, X, cfg)]
    _emit({"command": ["enumerate", str(args.problem), "--what", args.what],
           "results": results}, started)
    return EXIT_OK


def cmd_copositive(args) -> int:
    started = time.monotonic()
    problem_doc = _load_json(args.problem)
    Q = _matrix(problem_doc, "Q", "copositive")
    cfg = _config_from(None, args)
    executor = ThreadPoolExecutor(args.threads) if args.threads > 1 else None
    try:
        if args.method == "absvalue":
            b = _vector(problem_doc, "b", "copositive")
            alpha = _vector(problem_doc, "alpha", "copositive")
            verdict = absvalue_copositivity(Q, b, alpha, cfg)
        else:
            if args.cone is None:
                raise SchemaError("--cone is required unless --method absvalue")
            cone = cone_from_json(_load_json(args.cone))
            if args.method == "oracle":
                verdict = copositive_on_cone(Q, cone, cfg)
            elif args.method == "one-neg-eig":
                verdict = copositive_one_neg_eig(Q, cone, cfg, executor)
            else:  # auto: eigens pick the specialized test when applicable
                try:
                    verdict = copositive_one_neg_eig(Q, cone, cfg, executor)
                except WrongInertia:
                    verdict = copositive_on_cone(Q, cone, cfg)
    finally:
        if executor is not None:
            executor.shutdown()
    report = {
        "command": ["copositive", str(args.problem), "--method", args.method],
        "status": verdict.status,
        "method": verdict.method,
        "min_value": verdict.min_value,
        "witness": verdict.witness,
    }
    _emit(report, started)
    return EXIT_OK if verdict.is_copositive else EXIT_NEGATIVE


def cmd_absqp(args) -> int:
    started = time.monotonic()
    doc = _load_json(args.problem)
    cfg = _config_from(None, args)
    Q = _matrix(doc, "Q", "absqp")
    b = _vector(doc, "b", "absqp")
    alpha = _vector(doc, "alpha", "absqp")
    cls = absvalue_classify(b, alpha, cfg)
    verdict = absvalue_copositivity(Q, b, alpha, cfg)
    report = {
        "command": ["absqp", str(args.problem)],
        "classification": {
            "zero": list(cls.zero_idx),
            "nonnegative": list(cls.plus_idx),
            "nonpositive": list(cls.minus_idx),
            "free": list(cls.free_idx),
        },
        "status": verdict.status,
        "min_value": verdict.min_value,
        "witness": verdict.witness,
    }
    _emit(report, started)
    return EXIT_OK if verdict.is_copositive else EXIT_NEGATIVE


def _load_json(path):
    from pathlib import Path

    p = Path(path)
    if not p.exists():
        raise SchemaError(f"file {p} not found")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(
            f"{p}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="plqkit",
        description="piecewise linear-quadratic programs: validation, "
                    "derivatives, optimality certificates, enumeration, "
                    "and copositivity tests",
    )
    ap.add_argument("--threads", type=int, default=1,
                    help="library-level parallelism (default 1, reproducible)")
    ap.add_argument("--tol", type=float, default=None,
                    help="override the base tolerance factor")
    ap.add_argument("--max-rows", type=int, default=None,
                    help="override row-count guards")
    ap.add_argument("--max-pieces", type=int, default=None,
                    help="override piece-count guards")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="continuity and C1 report for a PLQ objective")
    p.add_argument("problem")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("eval", help="objective values at query points")
    p.add_argument("problem")
    p.add_argument("--point", action="append",
                   help="comma-separated coordinates; repeatable")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("deriv", help="first/second directional derivatives")
    p.add_argument("problem")
    p.add_argument("--point", action="append")
    p.add_argument("--direction", action="append")
    p.set_defaults(func=cmd_deriv)

    p = sub.add_parser("certify", help="local / strong local optimality certificates")
    p.add_argument("problem")
    p.add_argument("--point", action="append")
    p.add_argument("--level", choices=["local", "strong"], default="local")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("enumerate", help="strict local minima or stationary values")
    p.add_argument("problem")
    p.add_argument("--what", choices=["minima", "values"], default="minima")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("copositive", help="copositivity of Q on a cone")
    p.add_argument("problem", help="JSON file with the matrix Q (and b, alpha for absvalue)")
    p.add_argument("--cone", default=None, help="JSON cone file (A, sense)")
    p.add_argument("--method", choices=["auto", "oracle", "one-neg-eig", "absvalue"],
                   default="auto")
    p.set_defaults(func=cmd_copositive)

    p = sub.add_parser("absqp", help="absolute-value constrained homogeneous QP test")
    p.add_argument("problem", help="JSON file with Q, b, alpha")
    p.set_defaults(func=cmd_absqp)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except GuardExceeded as exc:
        print(f"guard exceeded: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except PlqError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
