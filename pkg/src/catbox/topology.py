"""Box graphs the cat walks on: lines, rings and 2 x m grids.

Boxes are numbered from 1.  On a grid the upper row holds boxes ``1..m`` and
the lower row ``m+1..2m``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

ESCAPE = 0
"""Pseudo-destination of a move that leaves the boxes through an exit."""


class Kind(enum.Enum):
    LINE = "line"
    RING = "ring"
    GRID2XM = "grid"


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class Topology:
    kind: Kind
    size: int
    exits: bool = False

    def __post_init__(self):
        if self.size < 2:
            raise TopologyError(f"{self.kind.value} size must be >= 2, got {self.size}")
        if self.kind is Kind.RING and self.exits:
            raise TopologyError("a ring has no exits")

    @property
    def n(self) -> int:
        """Total number of boxes."""
        return 2 * self.size if self.kind is Kind.GRID2XM else self.size

    @property
    def boxes(self) -> range:
        return range(1, self.n + 1)

    def __str__(self):
        if self.kind is Kind.GRID2XM:
            text = f"grid:2x{self.size}"
        else:
            text = f"{self.kind.value}:{self.size}"
        return text + (":exits" if self.exits else "")

    def neighbors(self, box: int) -> list[int]:
        """One entry per direction the cat can take; ESCAPE marks a door."""
        n, m = self.n, self.size
        if self.kind is Kind.LINE:
            out = []
            for b in (box - 1, box + 1):
                if 1 <= b <= n:
                    out.append(b)
                elif self.exits:
                    out.append(ESCAPE)
            return out
        if self.kind is Kind.RING:
            if n == 2:
                return [3 - box]
            return [(box - 2) % n + 1, box % n + 1]
        row, col = divmod(box - 1, m)
        out = []
        for c in (col - 1, col + 1):
            if 0 <= c < m:
                out.append(row * m + c + 1)
            elif self.exits:
                out.append(ESCAPE)
        out.append((1 - row) * m + col + 1)
        if self.exits:
            out.append(ESCAPE)
        return out

    @cached_property
    def kernel(self) -> dict[int, list[tuple[int, Fraction]]]:
        return move_kernel(self)

    @cached_property
    def escape_probability(self) -> list[Fraction]:
        """Per box (index 0 = box 1) probability that one move leaves the grid."""
        return [sum((p for d, p in self.kernel[b] if d == ESCAPE), Fraction(0))
                for b in self.boxes]


def build_topology(kind: Kind | str, size: int, exits: bool = False) -> Topology:
    if isinstance(kind, str):
        try:
            kind = Kind(kind.lower())
        except ValueError:
            raise TopologyError(f"unknown topology kind {kind!r}") from None
    return Topology(kind, int(size), bool(exits))


def parse_topology(text: str) -> Topology:
    """Parse ``line:5``, ``line:5:exits``, ``ring:6``, ``grid:2x4[:exits]``."""
    parts = text.strip().lower().split(":")
    if len(parts) not in (2, 3) or (len(parts) == 3 and parts[2] != "exits"):
        raise TopologyError(f"bad topology spec {text!r}")
    kind, size = parts[0], parts[1]
    if kind == "grid":
        if not size.startswith("2x"):
            raise TopologyError(f"only 2 x m grids are supported: {text!r}")
        size = size[2:]
    try:
        size = int(size)
    except ValueError:
        raise TopologyError(f"bad size in topology spec {text!r}") from None
    return build_topology(kind, size, len(parts) == 3)


def move_kernel(t: Topology) -> dict[int, list[tuple[int, Fraction]]]:
    """Per-box list of ``(destination, probability)``; destination 0 is ESCAPE.

    Every available direction is equally likely.  Escape entries for the same
    box are merged into one.
    """
    kernel = {}
    for b in t.boxes:
        dests = t.neighbors(b)
        p = Fraction(1, len(dests))
        merged: dict[int, Fraction] = {}
        for d in dests:
            merged[d] = merged.get(d, Fraction(0)) + p
        kernel[b] = sorted(merged.items(), key=lambda kv: (kv[0] == ESCAPE, kv[0]))
    return kernel


def symmetries(t: Topology) -> list[tuple[int, ...]]:
    """Graph automorphisms as tuples ``sigma`` with ``sigma[i-1]`` the image of box i.

    The identity comes first.
    """
    n, m = t.n, t.size
    if t.kind is Kind.LINE:
        return [tuple(range(1, n + 1)), tuple(n + 1 - i for i in range(1, n + 1))]
    if t.kind is Kind.RING:
        perms = []
        for k in range(n):
            perms.append(tuple((i - 1 + k) % n + 1 for i in range(1, n + 1)))
        for k in range(n):
            perms.append(tuple((k - (i - 1)) % n + 1 for i in range(1, n + 1)))
        return list(dict.fromkeys(perms))

    def image(i, hflip, vflip):
        row, col = divmod(i - 1, m)
        if hflip:
            col = m - 1 - col
        if vflip:
            row = 1 - row
        return row * m + col + 1

    return [tuple(image(i, h, v) for i in range(1, n + 1))
            for h, v in ((False, False), (True, False), (False, True), (True, True))]


def first_step_boxes(t: Topology) -> list[int]:
    """Representatives for the first opening once mirror images are discarded."""
    if t.kind is Kind.RING:
        return [1]
    if t.kind is Kind.LINE:
        return list(range(1, (t.n + 1) // 2 + 1))
    return list(range(1, (t.size + 1) // 2 + 1))
