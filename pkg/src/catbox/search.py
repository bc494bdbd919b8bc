"""Branch-and-prune search over opening sequences.

The tree walk itself runs in float64 inside the kernel (compiled or pure
Python).  Every strategy it reports is rebuilt here and re-evaluated with
exact rationals, so the values in a ``SearchOutcome`` are exact even though
pruning decisions were taken in floating point with a small slack.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from ._fallback import KIND_COMPLETION, KIND_FINITE, KIND_NONE, KIND_REPEAT, _move, _total
from .dynamics import Distribution
from .evaluate import (EvalResult, EvaluationError, RepetitionCertificate, UnresolvedStrategyError,
                       evaluate_certified, evaluate_strategy, repetition_of)
from .numerics import format_rational
from .strategy import Strategy, canonical, format_strategy, sweep_strategy, twice_left_twice_right
from .topology import ESCAPE, Kind, Topology, first_step_boxes


class Objective(enum.Enum):
    MIN_DURATION = "duration"
    MIN_ESCAPE = "escape"


class SearchConfigError(ValueError):
    pass


@dataclass
class SearchConfig:
    objective: Objective = Objective.MIN_DURATION
    maxdepth: int = 16
    incumbent: Fraction | None = None
    symmetry_reduction: bool = True
    # (step, box): the opening at 1-based ``step`` is forced to ``box``; the
    # openings before it come from the ``prefix`` passed to search_optimal
    deviation_root: tuple[int, int] | None = None
    all_optima_within: float | None = None
    lookahead: bool = True
    completions: bool = True
    max_period: int = 12
    max_nodes: int = 2_000_000_000
    threads: int = 1
    warm_start: bool = True
    prune_empty: bool = True
    cut_repeats: bool = True
    tol: float = 1e-12
    rep_tol: float = 1e-13

    def __post_init__(self):
        if isinstance(self.objective, str):
            self.objective = Objective(self.objective)
        if self.maxdepth < 1:
            raise SearchConfigError("maxdepth must be at least 1")
        if self.incumbent is not None:
            self.incumbent = Fraction(self.incumbent)
            if self.incumbent <= 0:
                raise SearchConfigError("incumbent must be positive")
        if self.threads < 1:
            raise SearchConfigError("threads must be at least 1")
        if not 1 <= self.max_period <= 12:
            raise SearchConfigError("max_period must be in 1..12")


@dataclass
class Candidate:
    strategy: Strategy
    result: EvalResult
    kernel_value: float
    kind: str

    @property
    def value(self):
        return self.result.escape_rate if self._escape else self.result.duration

    _escape: bool = False


@dataclass
class SearchOutcome:
    topology: Topology
    objective: Objective
    strategy: Strategy | None
    result: EvalResult | None
    lower: float
    upper: object
    certificate: RepetitionCertificate | None
    nodes: int
    pruned: int
    status: str
    optima: list[Candidate] = field(default_factory=list)
    open_leaves: int = 0
    leaf_min_lb: float = math.inf
    max_prune_depth: int = -1
    truncated: bool = False
    kernel_value: float = math.inf
    source: str = "search"
    backend: str = ""

    @property
    def value(self):
        if self.result is None:
            return None
        return self.result.escape_rate if self.objective is Objective.MIN_ESCAPE else self.result.duration

    def as_dict(self) -> dict:
        out = {
            "topology": str(self.topology), "objective": self.objective.value,
            "strategy": format_strategy(self.strategy, self.topology) if self.strategy else None,
            "value": format_rational(self.value) if self.result else None,
            "result": self.result.as_dict() if self.result else None,
            "lower": self.lower, "upper": float(self.upper) if self.upper is not None else None,
            "nodes": self.nodes, "pruned": self.pruned, "status": self.status,
            "open_leaves": self.open_leaves, "truncated": self.truncated,
            "source": self.source, "backend": self.backend,
        }
        if self.certificate is not None:
            c = self.certificate
            out["certificate"] = {"t0": c.t0, "period": c.period, "factor": str(c.factor)}
        if self.optima:
            out["optima"] = [{"strategy": format_strategy(c.strategy, self.topology), **c.result.as_dict()}
                             for c in self.optima]
        return out


def kernel_tables(t: Topology):
    """Neighbour indices, move probabilities, degrees and escape probabilities (0-based)."""
    n = t.n
    nbr = np.zeros((n, 4), dtype=np.intc)
    prob = np.zeros((n, 4))
    deg = np.zeros(n, dtype=np.intc)
    escp = np.zeros(n)
    for b, row in t.kernel.items():
        k = 0
        for dest, p in row:
            if dest == ESCAPE:
                escp[b - 1] += float(p)
            else:
                nbr[b - 1, k] = dest - 1
                prob[b - 1, k] = float(p)
                k += 1
        deg[b - 1] = k
    return nbr, prob, deg, escp


def _root_state(tables, init, openings):
    """Float state after playing ``openings``, with the same operations as the kernel."""
    nbr, prob, deg, escp = tables
    n = len(deg)
    nb = [list(map(int, r)) for r in nbr]
    pr = [list(map(float, r)) for r in prob]
    dg = list(map(int, deg))
    ep = list(map(float, escp))
    v = [float(x) for x in init]
    w = [0.0] * n
    a = e = 0.0
    for b in openings:
        r = _total(v, n)
        a += r
        v[b - 1] = 0.0
        e += _move(v, w, nb, pr, dg, ep, n)
        v, w = w, v
    return v, a, e


def lower_bound(d: Distribution, step: int, objective: Objective, weighted=0, lookahead: bool = False,
                t: Topology | None = None):
    """Value no completion of the current node can beat.

    ``weighted`` is the sum of step index times mass terminated in steps
    1..``step``.  Duration: that sum plus (step + 1) times the mass still in
    the boxes.  Escape: the mass escaped so far.  With ``lookahead`` (needs
    ``t``) the next step is accounted too: at most one box is emptied and the
    door mass leaves.
    """
    objective = Objective(objective)
    alive = d.alive
    if objective is Objective.MIN_ESCAPE:
        lb = d.escaped
        if lookahead and alive:
            out = [v * t.escape_probability[i] for i, v in enumerate(d.inbox)]
            lb += sum(out) - max(out)
        return lb
    lb = weighted + (step + 1) * alive
    if lookahead and alive:
        out = sum(v * t.escape_probability[i] for i, v in enumerate(d.inbox))
        lb += max(0, alive - max(d.inbox) - out)
    return lb


def warm_start(t: Topology, objective: Objective) -> Strategy | None:
    """A cheap good strategy whose exact value seeds the pruning threshold."""
    if t.kind is Kind.LINE and t.n > 2:
        if not t.exits and objective is Objective.MIN_DURATION:
            return sweep_strategy(t.n)
        if t.exits and objective is Objective.MIN_ESCAPE and t.n >= 4:
            return twice_left_twice_right(t.n)
    return None


def _objective_value(res: EvalResult, objective: Objective):
    return res.escape_rate if objective is Objective.MIN_ESCAPE else res.duration


def _key(res: EvalResult, objective: Objective):
    if objective is Objective.MIN_ESCAPE:
        return (res.escape_rate, res.duration)
    return (res.duration,)


def _evaluate(t: Topology, s: Strategy, init) -> EvalResult:
    try:
        return evaluate_strategy(t, s, init=init)
    except UnresolvedStrategyError:
        if init is not None:
            raise
        return evaluate_certified(t, s)


_KIND_NAMES = {KIND_FINITE: "finite", KIND_REPEAT: "repetition", KIND_COMPLETION: "completion"}


def _rebuild(prefix, path, kind, length, per) -> Strategy:
    boxes = [b + 1 for b in path[:length]]
    if kind == KIND_FINITE:
        return Strategy(tuple(prefix) + tuple(boxes))
    return canonical(Strategy(tuple(prefix) + tuple(boxes[:length - per]), tuple(boxes[length - per:])))


def search_optimal(t: Topology, cfg: SearchConfig | None = None, prefix=(), init=None) -> SearchOutcome:
    """Best strategy within ``cfg.maxdepth`` further steps after ``prefix``.

    ``prefix`` (boxes, 1-based) is played first and kept fixed; with
    ``cfg.deviation_root = (step, box)`` the opening at ``step`` is forced
    too, which is how the prover roots its deviation searches.
    """
    cfg = cfg or SearchConfig()
    obj = cfg.objective
    if obj is Objective.MIN_ESCAPE and not t.exits:
        raise SearchConfigError(f"{t} has no exits; minimising escape needs exits")
    prefix = tuple(prefix)
    if cfg.deviation_root is not None:
        step, box = cfg.deviation_root
        if step != len(prefix) + 1:
            raise SearchConfigError(f"deviation at step {step} needs a prefix of {step - 1} openings")
        prefix = prefix + (box,)
    for b in prefix:
        if not 1 <= b <= t.n:
            raise SearchConfigError(f"box {b} out of range for {t}")

    tables = kernel_tables(t)
    if init is None:
        start = [1.0 / t.n] * t.n
    else:
        start = [float(x) for x in (init.inbox if isinstance(init, Distribution) else init)]
    root, root_cost, root_esc = _root_state(tables, start, prefix)

    # incumbent: explicit, else the warm-start strategy's exact value
    ws_strategy, ws_result = None, None
    bound = math.inf
    if cfg.incumbent is not None:
        bound = float(cfg.incumbent)
    elif cfg.warm_start and not prefix and init is None:
        ws_strategy = warm_start(t, obj)
        if ws_strategy is not None:
            ws_result = evaluate_strategy(t, ws_strategy)
            bound = float(_objective_value(ws_result, obj))

    mask = np.zeros(t.n, dtype=np.uint8)
    if cfg.symmetry_reduction and not prefix and init is None:
        for b in first_step_boxes(t):
            mask[b - 1] = 1
    else:
        mask[:] = 1
    eps = -1.0 if cfg.all_optima_within is None else float(cfg.all_optima_within)

    def run(sub_mask, shared):
        return kernels.dfs_search(
            *tables, np.array(root), root_cost, root_esc, sub_mask,
            0 if obj is Objective.MIN_DURATION else 1, cfg.maxdepth, bound, cfg.tol, eps,
            cfg.lookahead, cfg.completions, cfg.max_period, cfg.rep_tol, cfg.prune_empty,
            cfg.max_nodes, shared, cut_repeats=cfg.cut_repeats)

    first = [b for b in range(t.n) if mask[b]]
    if cfg.threads > 1 and len(first) > 1:
        shared = np.array([bound])
        masks = []
        for b in first:
            m = np.zeros(t.n, dtype=np.uint8)
            m[b] = 1
            masks.append(m)
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            parts = list(pool.map(lambda m: run(m, shared), masks))
        res = _merge(parts, cfg.tol)
    else:
        res = run(mask, None)

    return _finish(t, cfg, prefix, init, res, ws_strategy, ws_result, bound)


def _merge(parts, tol):
    """Combine subtree results in subtree order, as a single-threaded walk would."""
    out = dict(parts[0])
    out["optima"] = list(parts[0]["optima"])
    for r in parts[1:]:
        p1, p2 = r["best_p1"], r["best_p2"]
        if p1 < out["best_p1"] - tol or (p1 <= out["best_p1"] + tol and p2 < out["best_p2"] - tol):
            for k in ("best_p1", "best_p2", "best_path", "best_kind", "best_len", "best_per"):
                out[k] = r[k]
        for k in ("nodes", "pruned", "open_leaves", "repeat_cuts"):
            out[k] += r[k]
        out["max_prune_depth"] = max(out["max_prune_depth"], r["max_prune_depth"])
        out["leaf_min_lb"] = min(out["leaf_min_lb"], r["leaf_min_lb"])
        out["truncated"] = out["truncated"] or r["truncated"]
        out["optima_overflow"] = out["optima_overflow"] or r["optima_overflow"]
        out["optima"].extend(r["optima"])
    return out


def _finish(t, cfg, prefix, init, res, ws_strategy, ws_result, bound) -> SearchOutcome:
    obj = cfg.objective
    escape = obj is Objective.MIN_ESCAPE
    strategy = result = None
    source = "search"
    kernel_value = res["best_p1"]
    if res["best_kind"] != KIND_NONE:
        strategy = _rebuild(prefix, res["best_path"], res["best_kind"], res["best_len"], res["best_per"])
        result = _evaluate(t, strategy, init)
    if ws_result is not None and (result is None or _key(ws_result, obj) < _key(result, obj)):
        strategy, result, source = ws_strategy, ws_result, "warm start"

    optima = []
    if cfg.all_optima_within is not None:
        seen = {}
        limit = res["best_p1"] + cfg.all_optima_within
        for path, kind, length, per, p1, _ in res["optima"]:
            if p1 > limit + cfg.tol:
                continue
            s = _rebuild(prefix, path, kind, length, per)
            name = format_strategy(s)
            if name in seen:
                continue
            try:
                r = _evaluate(t, s, init)
            except EvaluationError:
                continue
            seen[name] = Candidate(s, r, p1, _KIND_NAMES[kind], escape)
        if result is not None:
            best = _objective_value(result, obj)
            optima = [c for c in seen.values()
                      if float(_objective_value(c.result, obj) - best) <= cfg.all_optima_within]
            optima.sort(key=lambda c: (_objective_value(c.result, obj), format_strategy(c.strategy)))

    if strategy is None:
        status = "truncated" if res["truncated"] else "unresolved"
    elif res["truncated"]:
        status = "truncated"
    elif res["open_leaves"] and res["leaf_min_lb"] < float(_objective_value(result, obj)) - cfg.tol:
        status = "depth-limited"
    else:
        status = "optimal within depth"
    upper = _objective_value(result, obj) if result is not None else (
        None if math.isinf(bound) else cfg.incumbent)
    lower = min(res["leaf_min_lb"], float(upper) if upper is not None else math.inf)
    cert = None
    if strategy is not None and strategy.cycle and init is None:
        cert = repetition_of(t, strategy, steps=len(strategy.prefix) + 4 * len(strategy.cycle) + 24)
    return SearchOutcome(
        topology=t, objective=obj, strategy=strategy, result=result, lower=lower, upper=upper,
        certificate=cert, nodes=res["nodes"], pruned=res["pruned"], status=status, optima=optima,
        open_leaves=res["open_leaves"], leaf_min_lb=res["leaf_min_lb"],
        max_prune_depth=res["max_prune_depth"], truncated=res["truncated"],
        kernel_value=kernel_value, source=source, backend=kernels.backend_name())
