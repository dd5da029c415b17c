"""Command-line front end: ``ptl check|oracle|compile|solve|translate|rewrite|entropy|gen``.

Exit codes: 0 TRUE/SAT/success, 1 FALSE, 2 error, 3 UNKNOWN.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from pathlib import Path

from . import atoms, fopt, gen, realc, solver, teameval, translate
from .core import Structure, WeightedTeam, instance_to_json, load_instance, unit_team
from .syntax import (Dialect, dialect_of, free_vars, has_boolneg, nnf, parse, star_translate,
                     to_text)

EXIT_TRUE, EXIT_FALSE, EXIT_ERROR, EXIT_UNKNOWN = 0, 1, 2, 3


class RouteUnavailable(ValueError):
    pass


def _seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    return int(os.environ.get("PTL_SEED", "0"))


def _formula(arg: str):
    """A formula file, or the formula text itself when no such file exists."""
    p = Path(arg)
    text = p.read_text(encoding="utf-8") if p.is_file() else arg
    return parse(text)


def _team(A: Structure, X: WeightedTeam | None, phi) -> WeightedTeam:
    if X is not None:
        return X
    if free_vars(phi):
        raise RouteUnavailable(f"the instance has no team but the formula has free variables "
                               f"{sorted(free_vars(phi))}")
    return unit_team(A.domain)


def _emit(args, verdict: str, report: dict) -> None:
    report = {"command": args.command, "verdict": verdict, "seed": _seed(args), **report}
    if getattr(args, "json", False):
        print(json.dumps(report, indent=2, sort_keys=True, default=str))
    else:
        print(verdict)
        for k, v in report.items():
            if k not in ("command", "verdict", "seed"):
                print(f"  {k}: {v if not isinstance(v, (dict, list)) else json.dumps(v, default=str)}")


def _truth(b: bool) -> tuple[str, int]:
    return ("TRUE", EXIT_TRUE) if b else ("FALSE", EXIT_FALSE)


# ---------------------------------------------------------------- commands


def cmd_check(args) -> int:
    A, X = load_instance(args.instance)
    phi = _formula(args.formula)
    t0 = time.monotonic()
    report: dict = {"formula": to_text(phi)}
    d = dialect_of(phi)
    if d is Dialect.FOPT or (d is Dialect.FO and X is None and not free_vars(phi)
                             and args.oracle is None and args.witness is None and not args.via_compile):
        if d is Dialect.FOPT:
            v = fopt.eval_fopt(A, _team(A, X, phi), phi, trace_depth=args.trace)
            report["route"] = "fopt"
            if v.trace is not None:
                report["trace"] = v.trace.to_json()
            verdict, code = _truth(v.value)
        else:
            report["route"] = "first-order"
            verdict, code = _truth(fopt.eval_fo(A, {}, phi))
    else:
        X = _team(A, X, phi)
        if args.witness is not None:
            w = json.loads(Path(args.witness).read_text(encoding="utf-8"))
            report["route"] = "witness"
            if teameval.check_witness(A, X, phi, w):
                verdict, code = "TRUE", EXIT_TRUE
            else:
                verdict, code = "UNKNOWN", EXIT_UNKNOWN
                report["note"] = "the supplied witness does not establish the formula"
        elif args.oracle is not None:
            report["route"] = f"bounded oracle, D={args.oracle}"
            try:
                v = teameval.eval_bounded(A, X, phi, args.oracle, budget=args.budget)
            except teameval.Overflow as e:
                report["note"] = str(e)
                verdict, code = "UNKNOWN", EXIT_UNKNOWN
            else:
                verdict, code = _truth(v)
        elif args.via_compile:
            report["route"] = "compile"
            verdict, code = _via_compile(A, X, phi, args, report)
        elif not teameval.needs_search(phi):
            report["route"] = "exact"
            verdict, code = _truth(teameval.eval_exact(A, X, phi))
        else:
            hint = ("negation over split disjunction or existential quantification"
                    if has_boolneg(phi) else "split disjunction or existential quantification")
            raise RouteUnavailable(f"the formula uses {hint}; choose a route with --oracle D, "
                                   f"--witness FILE or --via-compile")
    report["seconds"] = round(time.monotonic() - t0, 3)
    _emit(args, verdict, report)
    return code


def _via_compile(A, X, phi, args, report) -> tuple[str, int]:
    sys_ = realc.compile(A, phi, realc.Mode.CHECK, X)
    report["fragment"] = sys_.fragment.value
    report["stats"] = sys_.stats.to_json()
    c = realc.constant_verdict(sys_)
    if c is not None:
        return _truth(c)
    if sys_.fragment not in (realc.Fragment.EXISTENTIAL, realc.Fragment.EXISTENTIAL_LOG):
        raise RouteUnavailable("the compiled system has universal real quantifiers; export it with "
                               "`ptl compile --smt2` for an external decision procedure")
    res = solver.solve(sys_, seed=_seed(args), restarts=args.restarts, tol=args.tol)
    report["solver"] = res.to_json()
    return ("TRUE", EXIT_TRUE) if res.status is solver.Status.SAT else ("UNKNOWN", EXIT_UNKNOWN)


def cmd_oracle(args) -> int:
    A, X = load_instance(args.instance)
    phi = _formula(args.formula)
    X = _team(A, X, phi)
    t0 = time.monotonic()
    report: dict = {"formula": to_text(phi), "D": args.D}
    try:
        if args.witness_out:
            w = teameval.find_witness(A, X, phi, args.D, budget=args.budget)
            v = w is not None
            if v:
                Path(args.witness_out).write_text(json.dumps(teameval.witness_to_json(w), indent=2,
                                                             sort_keys=True) + "\n", encoding="utf-8")
                report["witness"] = args.witness_out
        else:
            v = teameval.eval_bounded(A, X, phi, args.D, budget=args.budget)
    except teameval.Overflow as e:
        report["note"] = str(e)
        _emit(args, "UNKNOWN", report)
        return EXIT_UNKNOWN
    report["seconds"] = round(time.monotonic() - t0, 3)
    verdict, code = _truth(v)
    _emit(args, verdict, report)
    return code


def _compile(args):
    A, X = load_instance(args.instance)
    phi = _formula(args.formula)
    mode = realc.Mode(args.mode)
    if mode is realc.Mode.CHECK:
        X = _team(A, X, phi)
    return realc.compile(A, phi, mode, X if mode is realc.Mode.CHECK else None)


def cmd_compile(args) -> int:
    sys_ = _compile(args)
    report = {"fragment": sys_.fragment.value, "mode": sys_.mode.value, "stats": sys_.stats.to_json()}
    if args.smt2:
        text = realc.emit_smtlib2(sys_)
        Path(args.smt2).write_text(text, encoding="utf-8")
        side = args.sidecar or args.smt2 + ".json"
        Path(side).write_text(realc.sidecar_json(sys_) + "\n", encoding="utf-8")
        report["smt2"] = args.smt2
        report["sidecar"] = side
    elif args.sidecar:
        Path(args.sidecar).write_text(realc.sidecar_json(sys_) + "\n", encoding="utf-8")
        report["sidecar"] = args.sidecar
    _emit(args, "OK", report)
    return EXIT_TRUE


def cmd_solve(args) -> int:
    sys_ = _compile(args)
    if sys_.fragment not in (realc.Fragment.EXISTENTIAL, realc.Fragment.EXISTENTIAL_LOG):
        raise RouteUnavailable(f"fragment {sys_.fragment.value} cannot be solved numerically; "
                               "export it with `ptl compile --smt2`")
    res = solver.solve(sys_, seed=_seed(args), restarts=args.restarts, tol=args.tol)
    report = res.to_json()
    report.pop("status")
    if res.status is solver.Status.SAT and args.out:
        Path(args.out).write_text(json.dumps(res.to_json(), indent=2, sort_keys=True) + "\n",
                                  encoding="utf-8")
        report["out"] = args.out
    _emit(args, res.status.value, report)
    return EXIT_TRUE if res.status is solver.Status.SAT else EXIT_UNKNOWN


def cmd_translate(args) -> int:
    phi = _formula(args.formula)
    text = translate.so_to_text(translate.thm3_translate(phi))
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return EXIT_TRUE


REWRITES = {
    "dep2indep": atoms.rewrite_dep_to_indep,
    "dep2entropy": atoms.rewrite_dep_to_entropy,
    "indep2entropy": atoms.rewrite_indep_to_entropy,
    "nnf": nnf,
    "star": star_translate,
}


def cmd_rewrite(args) -> int:
    phi = _formula(args.formula)
    print(to_text(REWRITES[args.rule](phi)))
    return EXIT_TRUE


def cmd_entropy(args) -> int:
    A, X = load_instance(args.instance)
    if X is None:
        raise RouteUnavailable("the instance has no team")
    vs = tuple(args.vars.replace(",", " ").split())
    h = atoms.entropy(X, vs)
    _emit(args, repr(h), {"vars": list(vs), "entropy": h})
    return EXIT_TRUE


def cmd_gen(args) -> int:
    seed = _seed(args)
    rng = random.Random(seed)
    A = gen.random_structure(rng, size=args.size)
    pool = tuple(gen.VARS[:args.free])
    if args.kind == "instance":
        X = gen.random_team(rng, A, pool, max_rows=args.rows) if pool else None
        print(json.dumps(instance_to_json(A, X), indent=2))
    elif args.kind == "fo":
        print(to_text(gen.random_fo(rng, pool, args.depth)))
    elif args.kind == "fopt":
        print(to_text(gen.random_fopt(rng, pool, args.depth)))
    else:
        kinds = ("indep", "marg", "dep") + (("entropy",) if args.entropy else ())
        print(to_text(gen.random_team_formula(rng, pool or ("x",), args.depth, kinds, args.boolneg)))
    return EXIT_TRUE


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ptl", description="Probabilistic team logic toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, instance=True, formula=True):
        if instance:
            sp.add_argument("instance", help="instance JSON (structure and optional team)")
        if formula:
            sp.add_argument("formula", help="formula file, or formula text")
        sp.add_argument("--json", action="store_true", help="print a JSON report")
        sp.add_argument("--seed", type=int, default=None, help="random seed (default: $PTL_SEED or 0)")

    def solving(sp):
        sp.add_argument("--restarts", type=int, default=solver.DEFAULT_RESTARTS)
        sp.add_argument("--tol", type=float, default=solver.DEFAULT_TOL)

    c = sub.add_parser("check", help="decide a formula on an instance")
    common(c)
    c.add_argument("--oracle", type=int, metavar="D", help="bounded oracle with grid denominator D")
    c.add_argument("--witness", metavar="FILE", help="verify a witness file")
    c.add_argument("--via-compile", action="store_true", help="compile to real arithmetic and solve")
    c.add_argument("--budget", type=int, default=teameval.DEFAULT_BUDGET)
    c.add_argument("--trace", type=int, default=0, metavar="DEPTH", help="evaluation trace depth")
    solving(c)
    c.set_defaults(func=cmd_check)

    o = sub.add_parser("oracle", help="bounded-witness oracle")
    common(o)
    o.add_argument("-D", type=int, required=True, help="grid denominator")
    o.add_argument("--budget", type=int, default=teameval.DEFAULT_BUDGET)
    o.add_argument("--witness-out", metavar="FILE", help="write the witness found")
    o.set_defaults(func=cmd_oracle)

    for name, func, helptext in (("compile", cmd_compile, "compile to real arithmetic"),
                                 ("solve", cmd_solve, "compile and search for a witness")):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("--mode", choices=("sat", "check"), default="sat")
        if name == "compile":
            sp.add_argument("--smt2", metavar="FILE", help="write SMT-LIB2")
            sp.add_argument("--sidecar", metavar="FILE", help="write the stats sidecar (JSON)")
        else:
            solving(sp)
            sp.add_argument("--out", metavar="FILE", help="write the witness (JSON)")
        sp.set_defaults(func=func)

    t = sub.add_parser("translate", help="second-order translation")
    common(t, instance=False)
    t.add_argument("--out", metavar="FILE")
    t.set_defaults(func=cmd_translate)

    r = sub.add_parser("rewrite", help="apply a rewrite rule")
    common(r, instance=False)
    r.add_argument("--rule", choices=sorted(REWRITES), required=True)
    r.set_defaults(func=cmd_rewrite)

    e = sub.add_parser("entropy", help="entropy of a marginal of the instance team")
    common(e, formula=False)
    e.add_argument("--vars", required=True, help='variables, e.g. "x y"')
    e.set_defaults(func=cmd_entropy)

    g = sub.add_parser("gen", help="random instances and formulas")
    common(g, instance=False, formula=False)
    g.add_argument("--kind", choices=("instance", "fo", "fopt", "team"), default="team")
    g.add_argument("--size", type=int, default=None, help="domain size (default: random, at most 4)")
    g.add_argument("--free", type=int, default=1, help="number of free variables")
    g.add_argument("--depth", type=int, default=3)
    g.add_argument("--rows", type=int, default=30)
    g.add_argument("--boolneg", action="store_true")
    g.add_argument("--entropy", action="store_true")
    g.set_defaults(func=cmd_gen)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, RuntimeError) as e:
        name = type(e).__name__
        print(f"error: {name}: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
