"""Deviation tests: local optimality certificates for a candidate strategy.

For every step up to the horizon, each alternative opening is forced and the
search is rooted at the resulting state with the candidate's exact value as
incumbent.  An alternative is refuted once every continuation has a lower
bound above that value; the absolute index of the step after which the last
branch was pruned is recorded.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .dynamics import Distribution, play_trace, uniform_init
from .evaluate import (EvaluationError, RepetitionCertificate, asymptotic_profile, evaluate_strategy,
                       repetition_of, symmetric_repetition_of, _play_prefix)
from .search import Objective, SearchConfig, search_optimal
from .strategy import Strategy, format_strategy
from .topology import Topology, symmetries


@dataclass
class Refutation:
    step: int
    box: int
    status: str            # refuted, tie, counterexample, inconclusive, symmetric
    refuted_at: int | None = None
    value: object = None
    strategy: Strategy | None = None
    nodes: int = 0

    def as_dict(self) -> dict:
        out = {"step": self.step, "box": self.box, "status": self.status,
               "refuted_at": self.refuted_at, "nodes": self.nodes}
        if self.value is not None:
            out["value"] = str(self.value)
        if self.strategy is not None:
            out["strategy"] = format_strategy(self.strategy)
        return out


@dataclass
class OptimalityCertificate:
    topology: Topology
    candidate: Strategy
    objective: Objective
    value: Fraction
    horizon: int
    lookahead: int
    records: list[Refutation] = field(default_factory=list)
    repetition: RepetitionCertificate | None = None
    # repetition up to a symmetry, when it closes before the exact one
    mirrored: tuple[RepetitionCertificate, tuple[int, ...]] | None = None
    asymptotic: dict | None = None

    @property
    def counterexamples(self) -> list[Refutation]:
        return [r for r in self.records if r.status == "counterexample"]

    @property
    def inconclusive_steps(self) -> list[int]:
        return sorted({r.step for r in self.records if r.status == "inconclusive"})

    @property
    def status(self) -> str:
        if self.counterexamples:
            return "counterexample"
        if self.inconclusive_steps:
            return "partial"
        return "certified"

    @property
    def latest_refutation(self) -> int:
        return max((r.refuted_at for r in self.records if r.refuted_at is not None), default=0)

    @property
    def repetition_covered(self) -> bool:
        """A repetition (exact, or up to a symmetry) starts and closes within the verified steps."""
        ends = [r.t0 + r.period for r in (self.repetition, self.mirrored and self.mirrored[0]) if r]
        return bool(ends) and min(ends) <= self.horizon

    def as_dict(self) -> dict:
        out = {"topology": str(self.topology), "candidate": format_strategy(self.candidate, self.topology),
               "objective": self.objective.value, "value": str(self.value),
               "horizon": self.horizon, "lookahead": self.lookahead, "status": self.status,
               "latest_refutation": self.latest_refutation,
               "records": [r.as_dict() for r in self.records]}
        if self.repetition is not None:
            r = self.repetition
            out["repetition"] = {"t0": r.t0, "period": r.period, "factor": str(r.factor),
                                 "covered": self.repetition_covered}
        if self.mirrored is not None:
            r, sigma = self.mirrored
            out["mirrored_repetition"] = {"t0": r.t0, "period": r.period, "factor": str(r.factor),
                                          "symmetry": list(sigma)}
        if self.asymptotic is not None:
            out["asymptotic"] = self.asymptotic
        return out

    def to_table(self) -> str:
        lines = [f"candidate {format_strategy(self.candidate, self.topology)} on {self.topology}: "
                 f"{self.objective.value} {self.value} ({float(self.value):.5f})",
                 f"{'step':>4} {'box':>4} {'status':<15} {'refuted at':>10}"]
        for r in self.records:
            at = "" if r.refuted_at is None else str(r.refuted_at)
            lines.append(f"{r.step:>4} {r.box:>4} {r.status:<15} {at:>10}")
        lines.append(f"status: {self.status}")
        if self.repetition is not None:
            r = self.repetition
            lines.append(f"repetition: t0={r.t0} period={r.period} factor={r.factor}")
        if self.mirrored is not None:
            r, sigma = self.mirrored
            lines.append(f"mirrored repetition: t0={r.t0} period={r.period} factor={r.factor} "
                         f"symmetry={''.join(map(str, sigma)) if self.topology.n <= 9 else sigma}")
        if self.repetition is None and self.asymptotic is not None:
            a = self.asymptotic
            lines.append(f"asymptotic cycle: period={a['period']} factor={a['factor']:.5f} (not exact)")
        return "\n".join(lines)


def _state_before(t: Topology, candidate: Strategy, step: int) -> Distribution:
    d, _ = _play_prefix(t, candidate.opening(step - 1), uniform_init(t))
    return d


def _stabiliser(t: Topology, d: Distribution):
    """Symmetries that leave the exact in-box distribution unchanged."""
    inbox = d.inbox
    return [s for s in symmetries(t) if all(inbox[s[i] - 1] == inbox[i] for i in range(t.n))]


def _test_deviation(t, candidate, value, objective, step, box, lookahead, max_nodes):
    cfg = SearchConfig(objective=objective, maxdepth=lookahead, incumbent=value,
                       symmetry_reduction=False, deviation_root=(step, box), lookahead=True,
                       completions=True, warm_start=False, max_nodes=max_nodes)
    out = search_optimal(t, cfg, prefix=candidate.opening(step - 1))
    if out.result is not None:
        v = out.value
        if v < value:
            return Refutation(step, box, "counterexample", None, v, out.strategy, out.nodes)
        if v == value and (out.open_leaves == 0 and not out.truncated):
            return Refutation(step, box, "tie", None, v, out.strategy, out.nodes)
    if out.open_leaves or out.truncated:
        return Refutation(step, box, "inconclusive", None, None, None, out.nodes)
    # root sits after the forced opening; a prune at depth k happens once the
    # state after step + k, plus the escape the next step cannot prevent,
    # already exceeds the candidate
    at = step + max(out.max_prune_depth, 0)
    return Refutation(step, box, "refuted", at, None, None, out.nodes)


def verify_local_optimality(t: Topology, candidate: Strategy, horizon: int, lookahead: int = 20,
                            objective: Objective | None = None, threads: int = 1,
                            max_nodes: int = 200_000_000) -> OptimalityCertificate:
    """Test every alternative opening at steps 1..``horizon``.

    Alternatives that are the image of the candidate's box under a symmetry
    fixing the current state are equivalent and marked ``symmetric``.
    """
    if horizon < 1 or lookahead < 1:
        raise ValueError("horizon and lookahead must be at least 1")
    if objective is None:
        objective = Objective.MIN_ESCAPE if t.exits else Objective.MIN_DURATION
    res = evaluate_strategy(t, candidate)
    value = res.escape_rate if objective is Objective.MIN_ESCAPE else res.duration

    jobs, records = [], []
    for step in range(1, horizon + 1):
        d = _state_before(t, candidate, step)
        if not d.alive:
            break
        own = candidate.box_at(step)
        same = {s[own - 1] for s in _stabiliser(t, d)}
        for b in t.boxes:
            if b == own:
                continue
            if b in same:
                records.append(Refutation(step, b, "symmetric"))
            else:
                jobs.append((step, b))

    def work(job):
        return _test_deviation(t, candidate, value, objective, job[0], job[1], lookahead, max_nodes)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records.extend(pool.map(work, jobs))
    else:
        records.extend(work(j) for j in jobs)
    records.sort(key=lambda r: (r.step, r.box))

    cert = OptimalityCertificate(t, candidate, objective, value, horizon, lookahead, records)
    if candidate.cycle:
        cert.repetition = repetition_of(t, candidate, steps=len(candidate.prefix) + 60)
        sym = symmetric_repetition_of(t, candidate, steps=len(candidate.prefix) + 60)
        if sym is not None and (cert.repetition is None or sym[0].t0 + sym[0].period
                                < cert.repetition.t0 + cert.repetition.period):
            cert.mirrored = sym
        if cert.repetition is None:
            cert.asymptotic = asymptotic_note(t, candidate)
    return cert


def asymptotic_note(t: Topology, candidate: Strategy) -> dict | None:
    """Period and decay of the limiting cycle when the repetition is only approached."""
    try:
        _, lam = asymptotic_profile(t, candidate)
    except (EvaluationError, ArithmeticError):
        return None
    return {"period": len(candidate.cycle), "factor": float(lam), "exact": False}


def escape_after(t: Topology, openings, steps: int | None = None) -> Fraction:
    """Exact escaped mass after playing ``openings`` (or its first ``steps``)."""
    openings = list(openings)[:steps]
    d, _ = _play_prefix(t, openings, uniform_init(t))
    return d.escaped
