"""Recompute the stored table cells and diff them against their expected values."""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

from .dynamics import cycle_map
from .evaluate import asymptotic_profile, evaluate_certified, evaluate_strategy
from .formulas import FORMULAS, grid_exit_oracle, random_open_solve
from .numerics import format_rational, parse_rational
from .strategy import parse_strategy, sweep_strategy, twice_left_twice_right
from .topology import parse_topology

TABLE_IDS = tuple(f"T{i}" for i in range(1, 12))


def load_specs() -> dict:
    with resources.files("catbox").joinpath("data/tables.json").open() as f:
        return json.load(f)


@dataclass
class CellResult:
    table: str
    id: str
    computed: object
    expected: object
    exact: bool
    tol: float
    mode: str

    @property
    def diff(self) -> float:
        return abs(float(self.computed) - float(self.expected))

    @property
    def ok(self) -> bool:
        if self.exact:
            return self.computed == self.expected
        return self.diff <= self.tol

    def as_dict(self) -> dict:
        fmt = lambda x: format_rational(x) if isinstance(x, Fraction) else float(x)  # noqa: E731
        return {"table": self.table, "cell": self.id, "computed": fmt(self.computed),
                "expected": fmt(self.expected), "diff": self.diff, "exact": self.exact,
                "tol": self.tol, "mode": self.mode, "ok": self.ok}


@lru_cache(maxsize=None)
def _evaluate(top: str, strat: str):
    t = parse_topology(top)
    return evaluate_strategy(t, parse_strategy(strat, t))


@lru_cache(maxsize=None)
def _profile(top: str, strat: str, phase: int):
    return asymptotic_profile(parse_topology(top), parse_strategy(strat), phase)[0]


def compute_cell(c: dict):
    kind = c["kind"]
    if kind == "eval":
        return getattr(_evaluate(c["topology"], c["strategy"]), c["quantity"])
    if kind == "certified":
        t = parse_topology(c["topology"])
        return getattr(evaluate_certified(t, parse_strategy(c["strategy"], t)), c["quantity"])
    if kind == "sweep":
        t = parse_topology(c["topology"])
        return getattr(evaluate_strategy(t, sweep_strategy(t.n)), c["quantity"])
    if kind == "tlr":
        t = parse_topology(f"line:{c['n']}:exits")
        return getattr(evaluate_strategy(t, twice_left_twice_right(t.n)), c["quantity"])
    if kind == "random_open":
        esc, dur = random_open_solve(c["n"])
        return esc if c["quantity"] == "escape_rate" else dur
    if kind == "profile":
        return float(_profile(c["topology"], c["strategy"], c["phase"])[c["box"] - 1])
    if kind == "cycle_entry":
        cm = cycle_map(parse_topology(c["topology"]), tuple(int(ch) for ch in c["cycle"]))
        return cm.M[c["row"] - 1][c["col"] - 1]
    if kind == "formula":
        fn, _ = FORMULAS[c["name"]]
        return Fraction(fn(*c["args"]))
    if kind == "grid_oracle":
        times = grid_exit_oracle(c["m"])
        return sum(times) / len(times)
    raise ValueError(f"unknown cell kind {kind!r}")


def _expected(c: dict):
    return parse_rational(c["expected"]) if c["exact"] else float(c["expected"])


def reproduce_tables(ids=None) -> list[CellResult]:
    """Compute every stored cell of the requested tables (all by default)."""
    specs = load_specs()["tables"]
    ids = list(ids) if ids else list(TABLE_IDS)
    bad = [i for i in ids if i not in specs]
    if bad:
        raise KeyError(f"unknown table id(s) {bad}; choose from {list(TABLE_IDS)}")
    out = []
    for tid in ids:
        for c in specs[tid]["cells"]:
            val = compute_cell(c)
            if not c["exact"]:
                val = float(val)
            out.append(CellResult(tid, c["id"], val, _expected(c), c["exact"], c["tol"], c["mode"]))
    return out


def format_report(results: list[CellResult]) -> str:
    lines = [f"{'cell':<28} {'computed':>22} {'expected':>16} {'|diff|':>10}  status"]
    for r in results:
        comp = format_rational(r.computed) if isinstance(r.computed, Fraction) else f"{r.computed:.6f}"
        exp = format_rational(r.expected) if isinstance(r.expected, Fraction) else f"{r.expected:g}"
        flag = "ok" if r.ok else "MISMATCH"
        note = " (evaluation-only)" if r.mode == "evaluation-only" else ""
        lines.append(f"{r.table + '.' + r.id:<28} {comp:>22} {exp:>16} {r.diff:>10.2e}  {flag}{note}")
    bad = [r for r in results if not r.ok]
    lines.append(f"{len(results) - len(bad)}/{len(results)} cells reproduced")
    for r in bad:
        lines.append(f"mismatch: {r.table}.{r.id}")
    return "\n".join(lines)
