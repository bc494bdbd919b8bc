"""Opening strategies: a finite prefix followed by an optional repeated cycle."""
from __future__ import annotations

import re
from dataclasses import dataclass

from .topology import Topology


class StrategyError(ValueError):
    pass


@dataclass(frozen=True)
class Strategy:
    prefix: tuple[int, ...] = ()
    cycle: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(int(b) for b in self.prefix))
        object.__setattr__(self, "cycle", tuple(int(b) for b in self.cycle))
        if any(b < 1 for b in self.prefix + self.cycle):
            raise StrategyError("box numbers start at 1")

    @property
    def finite(self) -> bool:
        return not self.cycle

    def __str__(self):
        return format_strategy(self)

    def __len__(self):
        return len(self.prefix) + len(self.cycle)

    def box_at(self, step: int) -> int:
        return box_at(self, step)

    def opening(self, steps: int) -> list[int]:
        """The first ``steps`` openings."""
        return [box_at(self, k) for k in range(1, steps + 1)]


def box_at(s: Strategy, step: int) -> int:
    """Box opened at 1-based ``step``."""
    if step < 1:
        raise StrategyError(f"steps start at 1, got {step}")
    k = len(s.prefix)
    if step <= k:
        return s.prefix[step - 1]
    if not s.cycle:
        raise StrategyError(f"finite strategy {format_strategy(s)} exhausted at step {step}")
    return s.cycle[(step - k - 1) % len(s.cycle)]


_PRESETS = {
    # n=8 line without exits, first 87 known steps of the fastest strategy
    "s8_fast": ("47527425774224774224774472472552744725527447255274"
                "4725527447255274257752472552742577524", ""),
    # n=8 line with exits
    "s8r": ("177122477", "2347187237762236818761"),
    # n=9 line with exits
    "s9": ("1829825881238258298723428763",
           "9298723458817181238765281318123876522939298723458297"),
    # n=8 line with exits, short tail 72347 from step 9 on
    "s8r_alt": ("17712247", "72347"),
}

PRESET_TOPOLOGY = {"s8_fast": "line:8", "s8r": "line:8:exits", "s9": "line:9:exits",
                   "s8r_alt": "line:8:exits"}


def preset(name: str) -> Strategy:
    key = name.removeprefix("preset:")
    if key == "s9r":
        key = "s9"
    try:
        prefix, cycle = _PRESETS[key]
    except KeyError:
        raise StrategyError(f"unknown preset {name!r}; known: {sorted(_PRESETS)}") from None
    return Strategy(tuple(map(int, prefix)), tuple(map(int, cycle)))


_COMPACT = re.compile(r"^(\d*)(?:\((\d+)\))?$")
_COMMA = re.compile(r"^([\d,\s]*?)\s*(?:\(([\d,\s]+)\))?$")


def _boxes(text: str, comma: bool) -> tuple[int, ...]:
    if comma:
        return tuple(int(x) for x in text.replace(" ", "").split(",") if x)
    return tuple(int(ch) for ch in text)


def parse_strategy(text: str, t: Topology | None = None) -> Strategy:
    """Parse ``"2552(33)"``, ``"2,5,5,2(3,3)"`` or ``"preset:s8r"``.

    The parenthesised suffix is the repeated cycle.  Digit form needs every box
    number to be a single digit, so on topologies with more than nine boxes
    text is always read in comma form (``"12"`` is box 12 there).
    """
    text = text.strip()
    if not text:
        raise StrategyError("empty strategy")
    if text.startswith("preset:"):
        s = preset(text)
    else:
        if text.count("(") != text.count(")") or text.count("(") > 1:
            raise StrategyError(f"malformed parentheses in {text!r}")
        if "," in text or (t is not None and t.n > 9):
            m = _COMMA.match(text)
            if not m:
                raise StrategyError(f"cannot parse strategy {text!r}")
            s = Strategy(_boxes(m.group(1), True), _boxes(m.group(2) or "", True))
        else:
            m = _COMPACT.match(text.replace(" ", ""))
            if not m:
                raise StrategyError(f"cannot parse strategy {text!r}")
            s = Strategy(_boxes(m.group(1), False), _boxes(m.group(2) or "", False))
        if not s.prefix and not s.cycle:
            raise StrategyError(f"empty strategy {text!r}")
    if t is not None:
        for b in s.prefix + s.cycle:
            if not 1 <= b <= t.n:
                raise StrategyError(f"box {b} out of range for {t}")
    return s


def format_strategy(s: Strategy, t: Topology | None = None) -> str:
    """Digit form when every box is a single digit (and ``t`` has at most 9 boxes), else comma form."""
    boxes = s.prefix + s.cycle
    if all(1 <= b <= 9 for b in boxes) and (t is None or t.n <= 9):
        prefix = "".join(map(str, s.prefix))
        cycle = "".join(map(str, s.cycle))
    else:
        prefix = ",".join(map(str, s.prefix))
        cycle = ",".join(map(str, s.cycle))
    return prefix + (f"({cycle})" if s.cycle else "")


def mirror_strategy(s: Strategy, sigma) -> Strategy:
    return Strategy(tuple(sigma[b - 1] for b in s.prefix), tuple(sigma[b - 1] for b in s.cycle))


def canonical(s: Strategy) -> Strategy:
    """Same opening sequence, shortest cycle and shortest prefix."""
    cycle = list(s.cycle)
    for p in range(1, len(cycle) + 1):
        if len(cycle) % p == 0 and cycle == cycle[:p] * (len(cycle) // p):
            cycle = cycle[:p]
            break
    prefix = list(s.prefix)
    while cycle and prefix and prefix[-1] == cycle[-1]:
        prefix.pop()
        cycle = cycle[-1:] + cycle[:-1]
    return Strategy(tuple(prefix), tuple(cycle))


def sweep_strategy(n: int) -> Strategy:
    """2, 3, ..., n-1, n-1, ..., 3, 2: catches the cat within 2n-4 steps."""
    if n <= 2:
        raise StrategyError("the sweep needs n > 2")
    up = list(range(2, n))
    return Strategy(tuple(up + up[::-1]))


def twice_left_twice_right(n: int) -> Strategy:
    if n < 4:
        raise StrategyError("twice-left-twice-right needs n >= 4")
    return Strategy((1, n - 1, n - 1, 1), (2, 2, n - 1, n - 1))
