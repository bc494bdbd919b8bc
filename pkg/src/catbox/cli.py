"""Command-line entry point: ``catbox <command> ...`` or ``python -m catbox``.

Exit codes: 0 success, 1 a computed value disagrees with its expectation
(``tables``, ``simulate --check``), 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .dynamics import play_trace
from .evaluate import EvaluationError, evaluate_certified, evaluate_strategy
from .formulas import FORMULAS
from .montecarlo import crosscheck, simulate
from .numerics import describe, format_rational, parse_rational
from .prove import verify_local_optimality
from .search import Objective, SearchConfig, SearchConfigError, search_optimal
from .strategy import StrategyError, format_strategy, parse_strategy
from .tables import TABLE_IDS, format_report, reproduce_tables
from .topology import TopologyError, parse_topology

JSON_SCHEMA = "catbox/1"


class UsageError(Exception):
    pass


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps({"schema": JSON_SCHEMA, "command": args.command, **payload}, sort_keys=True))
    else:
        print(text)


def _load(args):
    t = parse_topology(args.topology)
    return t, parse_strategy(args.strategy, t)


def cmd_eval(args) -> int:
    t, s = _load(args)
    if args.certified:
        res = evaluate_certified(t, s)
    else:
        res = evaluate_strategy(t, s, exact=not args.float)
    lines = [f"duration = {describe(res.duration)}"]
    if t.exits:
        lines.append(f"escape rate = {describe(res.escape_rate)}")
    lines.append(f"caught rate = {describe(res.caught_rate)}")
    if not res.exact:
        lines.append(f"bound = {res.bound:.3e} ({res.diagnosis})")
    _emit(args, {"topology": str(t), "strategy": format_strategy(s, t), **res.as_dict()}, "\n".join(lines))
    return 0


def cmd_search(args) -> int:
    t = parse_topology(args.topology)
    obj = Objective(args.objective) if args.objective else (
        Objective.MIN_ESCAPE if t.exits else Objective.MIN_DURATION)
    cfg = SearchConfig(objective=obj, maxdepth=args.maxdepth,
                       incumbent=parse_rational(args.incumbent) if args.incumbent else None,
                       symmetry_reduction=not args.no_symmetry, threads=args.threads,
                       all_optima_within=args.all_optima_within)
    out = search_optimal(t, cfg)
    if out.strategy is None:
        text = f"no strategy resolved within depth {args.maxdepth} ({out.nodes} nodes)"
    else:
        text = "\n".join([
            f"strategy = {format_strategy(out.strategy, t)}",
            f"{obj.value} = {describe(out.value)}",
            *([f"duration = {describe(out.result.duration)}"] if obj is Objective.MIN_ESCAPE else []),
            f"status = {out.status} (nodes {out.nodes}, pruned {out.pruned}, {out.backend} kernel)",
            *([f"repetition: t0={out.certificate.t0} period={out.certificate.period} "
               f"factor={out.certificate.factor}"] if out.certificate else []),
            *(f"optimum {format_strategy(c.strategy, t)} = {describe(c.value)}" for c in out.optima),
        ])
    _emit(args, out.as_dict(), text)
    return 0


def cmd_prove(args) -> int:
    t, s = _load(args)
    cert = verify_local_optimality(t, s, args.horizon, args.lookahead, threads=args.threads)
    _emit(args, cert.as_dict(), cert.to_table())
    return 0


def _formula_args(name, raw):
    _, sig = FORMULAS[name]
    want = sig.split()
    if len(raw) != len(want):
        raise UsageError(f"formula {name} takes {len(want)} argument(s): {sig}")
    try:
        return [int(x) for x in raw]
    except ValueError:
        raise UsageError(f"formula {name} needs integer arguments") from None


def cmd_formula(args) -> int:
    if args.name not in FORMULAS:
        raise UsageError(f"unknown formula {args.name!r}; choose from {sorted(FORMULAS)}")
    fn, _ = FORMULAS[args.name]
    vals = _formula_args(args.name, args.args)
    try:
        value = fn(*vals)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if isinstance(value, tuple):
        esc, dur = value
        text = f"escape rate = {describe(esc)}\nduration = {describe(dur)}"
        payload = {"escape_rate": format_rational(esc), "duration": format_rational(dur)}
    else:
        text = describe(value)
        payload = {"value": format_rational(Fraction(value)) if isinstance(value, (int, Fraction))
                   else value}
    _emit(args, {"formula": args.name, "args": vals, **payload}, text)
    return 0


def cmd_simulate(args) -> int:
    t, s = _load(args)
    if args.check:
        cc = crosscheck(t, s, args.trials, args.seed, args.max_steps, args.threads)
        rep = cc.report
    else:
        cc, rep = None, simulate(t, s, args.trials, args.seed, args.max_steps, args.threads)
    if args.csv:
        with open(args.csv, "w") as f:
            f.write(rep.histogram_csv())
    lines = [f"trials = {rep.trials} (caught {rep.caught}, escaped {rep.escaped}, truncated {rep.truncated})",
             f"mean duration = {rep.mean_duration:.5f} +- {rep.duration_se:.5f}",
             f"escape frequency = {rep.escape_frequency:.5f} +- {rep.escape_se:.5f}",
             f"seed = {rep.seed} ({rep.generator})"]
    payload = {"report": json.loads(rep.to_json())}
    if cc is not None:
        lines.append(f"crosscheck {'pass' if cc.passed else 'FAIL'}: duration z={cc.duration_z:.2f} "
                     f"vs {cc.exact_duration:.5f}, escape z={cc.escape_z:.2f} vs {cc.exact_escape:.5f}")
        payload["crosscheck"] = cc.as_dict()
    _emit(args, payload, "\n".join(lines))
    return 0 if cc is None or cc.passed else 1


def cmd_tables(args) -> int:
    ids = [i.upper() for i in args.ids] or None
    try:
        res = reproduce_tables(ids)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    _emit(args, {"cells": [r.as_dict() for r in res], "ok": all(r.ok for r in res)}, format_report(res))
    return 0 if all(r.ok for r in res) else 1


def cmd_trace(args) -> int:
    t, s = _load(args)
    tr = play_trace(t, s, args.steps)
    if args.json:
        print(json.dumps({"schema": JSON_SCHEMA, "command": "trace", "topology": str(t),
                          "strategy": format_strategy(s, t), "trace": json.loads(tr.to_json())}, sort_keys=True))
    else:
        print(tr.to_table())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="catbox", description="Catch a randomly walking cat: exact "
                                "evaluation, optimal search, proofs and simulation.")
    p.add_argument("--version", action="version", version=f"catbox {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, strategy=True):
        sp.add_argument("topology", help="e.g. line:5, line:6:exits, ring:7, grid:2x3:exits")
        if strategy:
            sp.add_argument("strategy", help='e.g. "2332", "1661(2266)", "2,5,5,2(3,3)", preset:s8r')
        sp.add_argument("--json", action="store_true", help="machine-readable output")

    sp = sub.add_parser("eval", help="exact expected duration and escape rate")
    common(sp)
    sp.add_argument("--float", action="store_true", help="float64 instead of exact arithmetic")
    sp.add_argument("--certified", action="store_true",
                    help="bracket a finite strategy that leaves cats behind")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("search", help="best strategy up to a depth")
    common(sp, strategy=False)
    sp.add_argument("--objective", choices=["duration", "escape"])
    sp.add_argument("--maxdepth", type=int, default=16)
    sp.add_argument("--incumbent", help="initial pruning threshold p/q")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--all-optima-within", type=float, metavar="EPS")
    sp.add_argument("--no-symmetry", action="store_true", help="do not restrict the first opening")
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("prove", help="deviation test of a candidate strategy")
    common(sp)
    sp.add_argument("--horizon", type=int, required=True)
    sp.add_argument("--lookahead", type=int, default=20)
    sp.add_argument("--threads", type=int, default=1)
    sp.set_defaults(func=cmd_prove)

    sp = sub.add_parser("formula", help="closed forms: " + ", ".join(
        f"{k}({v})" for k, v in FORMULAS.items()))
    sp.add_argument("name")
    sp.add_argument("args", nargs="*")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_formula)

    sp = sub.add_parser("simulate", help="Monte Carlo playouts")
    common(sp)
    sp.add_argument("--trials", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-steps", type=int, default=10_000)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--csv", help="write the duration histogram to this file")
    sp.add_argument("--check", action="store_true", help="compare with the exact values (3 s.e.)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("tables", help="reproduce stored tables and diff against expectations")
    sp.add_argument("ids", nargs="*", metavar="ID", help=f"subset of {', '.join(TABLE_IDS)}")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_tables)

    sp = sub.add_parser("trace", help="step-by-step residence distribution")
    common(sp)
    sp.add_argument("--steps", type=int, default=20)
    sp.set_defaults(func=cmd_trace)
    return p


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, TopologyError, StrategyError, SearchConfigError) as exc:
        print(f"catbox {args.command}: {exc}", file=sys.stderr)
        return 2
    except (EvaluationError, ValueError) as exc:
        print(f"catbox {args.command}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli())
