"""Forward propagation of the cat's residence distribution.

A game step opens one box (the mass there is caught) and then moves the
remaining cat mass one step of the random walk (mass through a door escapes).
All routines work on exact ``Fraction`` values; passing float vectors gives
the same computation in floating point.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .numerics import format_rational
from .strategy import Strategy, box_at
from .topology import ESCAPE, Topology


@dataclass(frozen=True)
class Distribution:
    inbox: tuple
    caught: Fraction = Fraction(0)
    escaped: Fraction = Fraction(0)

    @property
    def alive(self):
        return sum(self.inbox)

    @property
    def total(self):
        return self.alive + self.caught + self.escaped

    def relative(self):
        """Inbox normalised by the mass still in the boxes."""
        r = self.alive
        return tuple(x / r for x in self.inbox) if r else tuple(self.inbox)


def uniform_init(t: Topology) -> Distribution:
    return Distribution(tuple(Fraction(1, t.n) for _ in t.boxes))


def apply_open(d: Distribution, box: int):
    """Open ``box``; returns the new distribution and the mass caught."""
    inbox = list(d.inbox)
    got = inbox[box - 1]
    inbox[box - 1] = got * 0
    return Distribution(tuple(inbox), d.caught + got, d.escaped), got


def _as_kernel(k):
    return k.kernel if isinstance(k, Topology) else k


def move_vector(inbox: Sequence, kernel) -> tuple[list, object]:
    """One random-walk move of ``inbox``; returns (new inbox, escaped mass)."""
    zero = inbox[0] * 0
    out = [zero] * len(inbox)
    esc = zero
    for b, mass in enumerate(inbox, start=1):
        if not mass:
            continue
        for dest, p in kernel[b]:
            if dest == ESCAPE:
                esc += mass * p
            else:
                out[dest - 1] += mass * p
    return out, esc


def apply_move(d: Distribution, k):
    """Move the cat mass with kernel ``k`` (a Topology or its move kernel)."""
    inbox, esc = move_vector(d.inbox, _as_kernel(k))
    return Distribution(tuple(inbox), d.caught, d.escaped + esc), esc


@dataclass(frozen=True)
class StepRecord:
    step: int
    box: int
    caught: object
    escaped: object
    dist: Distribution

    def as_dict(self):
        fmt = (lambda x: format_rational(x)) if isinstance(self.caught, Fraction) else float
        return {"step": self.step, "box": self.box, "caught": fmt(self.caught),
                "escaped": fmt(self.escaped), "inbox": [fmt(x) for x in self.dist.inbox]}


@dataclass
class StepTrace:
    """Per-step ledger of a game.  ``initial`` is the state before step 1."""
    initial: Distribution
    steps: list[StepRecord] = field(default_factory=list)

    def state(self, t: int) -> Distribution:
        """Distribution after step ``t`` (``t = 0`` is the initial state)."""
        return self.initial if t == 0 else self.steps[t - 1].dist

    def __len__(self):
        return len(self.steps)

    def to_json(self) -> str:
        return json.dumps([r.as_dict() for r in self.steps])

    def to_table(self) -> str:
        lines = [f"{'step':>4}  {'box':>3}  {'caught':>14}  {'escaped':>14}  inbox"]
        for r in self.steps:
            d = r.as_dict()
            lines.append(f"{d['step']:>4}  {d['box']:>3}  {str(d['caught']):>14}  "
                         f"{str(d['escaped']):>14}  [{', '.join(map(str, d['inbox']))}]")
        return "\n".join(lines)


def play_trace(t: Topology, s: Strategy, steps: int, init: Distribution | None = None) -> StepTrace:
    """Play ``steps`` steps of ``s`` starting from ``init`` (uniform by default).

    A finite strategy may run out only once no cat mass is left in the boxes;
    remaining steps are then dropped.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    d = init if init is not None else uniform_init(t)
    trace = StepTrace(d)
    kernel = t.kernel
    for k in range(1, steps + 1):
        if k > len(s.prefix) and not s.cycle:
            if d.alive:
                box_at(s, k)  # raises: strategy exhausted with cats left
            break
        b = box_at(s, k)
        d, got = apply_open(d, b)
        d, esc = apply_move(d, kernel)
        trace.steps.append(StepRecord(k, b, got, esc, d))
    return trace


@dataclass(frozen=True)
class CycleMap:
    """Exact linear action of one pass through a strategy cycle.

    ``M[j][i]`` is the fraction of mass entering the cycle in box ``i+1`` that
    sits in box ``j+1`` when the cycle ends.  The weight vectors give, per
    entering box, the mass caught or escaped during the cycle, the
    termination mass weighted by its 1-based step offset within the cycle
    (``duration_w``), and the summed alive mass at the start of each cycle
    step (``alive_w``).
    """
    cycle: tuple[int, ...]
    M: list[list]
    caught_w: list
    escaped_w: list
    duration_w: list
    alive_w: list

    @property
    def n(self) -> int:
        return len(self.M)

    @property
    def end_w(self) -> list:
        return [c + e for c, e in zip(self.caught_w, self.escaped_w)]


def cycle_map(t: Topology, cycle: Sequence[int], exact: bool = True) -> CycleMap:
    n = t.n
    kernel = t.kernel
    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    if not exact:
        kernel = {b: [(d, float(p)) for d, p in row] for b, row in kernel.items()}
    cols, caught_w, escaped_w, duration_w, alive_w = [], [], [], [], []
    for i in range(n):
        v = [zero] * n
        v[i] = one
        c_tot = e_tot = dur = alive = zero
        for off, b in enumerate(cycle, start=1):
            alive += sum(v)
            got = v[b - 1]
            v[b - 1] = zero
            v, esc = move_vector(v, kernel)
            c_tot += got
            e_tot += esc
            dur += off * (got + esc)
        cols.append(v)
        caught_w.append(c_tot)
        escaped_w.append(e_tot)
        duration_w.append(dur)
        alive_w.append(alive)
    M = [[cols[i][j] for i in range(n)] for j in range(n)]
    return CycleMap(tuple(cycle), M, caught_w, escaped_w, duration_w, alive_w)
