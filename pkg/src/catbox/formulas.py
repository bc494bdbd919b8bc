"""Closed forms for the no-player and random-player games."""
from __future__ import annotations

import enum
import math
from fractions import Fraction

import numpy as np

from .numerics import solve_rational_linear, solve_tridiagonal
from .topology import ESCAPE, Kind, Topology


def e_save(n: int) -> Fraction:
    """Approximate mean duration of the 2..n-1, n-1..2 sweep (derived for odd n)."""
    if n < 3:
        raise ValueError("e_save needs n >= 3")
    return Fraction(2 * n**3 - 5 * n**2 + 3 * n + 2, 2 * n * (n - 1))


def e_random_closed(n: int) -> int:
    """Mean duration when a uniformly random box is opened forever."""
    if n < 1:
        raise ValueError("n must be positive")
    return n


def e_random_partial(n: int, terms: int) -> float:
    q = 1 - 1 / n
    return sum(i * (1 / n) * q ** (i - 1) for i in range(1, terms + 1))


def e_exit(i: int, n: int) -> int:
    """Expected steps for an unhindered cat starting in box ``i`` to leave an exit line."""
    if not 1 <= i <= n:
        raise ValueError(f"box {i} out of range 1..{n}")
    return i * (n - i + 1)


def e_exit_avg(n: int) -> Fraction:
    return Fraction((n + 1) * (n + 2), 6)


def sine_profile(n: int) -> np.ndarray:
    """Starting distribution that the walk only rescales: tan(pi/(2n+2)) sin(i pi/(n+1))."""
    i = np.arange(1, n + 1)
    return math.tan(math.pi / (2 * n + 2)) * np.sin(i * math.pi / (n + 1))


def e_sin(n: int) -> float:
    return 1 / (1 - math.cos(math.pi / (n + 1)))


def e_approx(n: int) -> float:
    """Duration estimate for the random player assuming the sine profile throughout."""
    return 1 / (1 - (n - 1) / n * math.cos(math.pi / (n + 1)))


def random_open_solve(n: int) -> tuple[Fraction, Fraction]:
    """Escape rate and mean duration when the player opens a random box each step.

    Solves the escape-probability recurrence over all ``n`` start boxes
    (tridiagonal, exact) and converts with duration = n * (1 - escape).
    """
    if n < 2:
        raise ValueError("random_open_solve needs n >= 2")
    c = Fraction(n - 1, 2 * n)
    lower = [-c] * n
    upper = [-c] * n
    diag = [Fraction(1)] * n
    rhs = [Fraction(0)] * n
    rhs[0] += c
    rhs[-1] += c
    esc = solve_tridiagonal(lower, diag, upper, rhs)
    escape = sum(esc) / n
    return escape, n * (1 - escape)


class SequenceKind(enum.Enum):
    FIBONACCI = (0, 1)
    LUCAS = (2, 1)


def sequence_for(m: int) -> SequenceKind:
    return SequenceKind.FIBONACCI if m % 2 == 0 else SequenceKind.LUCAS


def fib_lucas_ext(kind: SequenceKind, k: int) -> int:
    """Fibonacci or Lucas number ``a_k``, extended to negative ``k`` by a_{k-2} = a_k - a_{k-1}."""
    a, b = kind.value  # a_0, a_1
    if k >= 0:
        for _ in range(k):
            a, b = b, a + b
        return a
    for _ in range(-k):
        a, b = b - a, a
    return a


def e2d(i: int, m: int) -> Fraction:
    """Expected exit time from column ``i`` of a 2 x m grid with doors on every side."""
    if m < 2:
        raise ValueError("e2d needs m >= 2")
    if not 1 <= i <= m:
        raise ValueError(f"column {i} out of range 1..{m}")
    i = min(i, m + 1 - i)
    kind = sequence_for(m)

    def a(k):
        return fib_lucas_ext(kind, k)

    return Fraction(4 * (2 * a(m) - 2 * a(m - 2 * i) - a(m - 2) + a(m - 2 - 2 * i)), a(m + 1))


def e2d_avg(m: int) -> Fraction:
    kind = sequence_for(m)

    def a(k):
        return fib_lucas_ext(kind, k)

    return Fraction(4, a(m + 1)) * (Fraction(2 * (m - 1), m) * a(m) - a(m - 2))


def exit_time_oracle(t: Topology) -> list[Fraction]:
    """Expected steps to leave the boxes with no player: solve (I - Q) x = 1 exactly."""
    if not t.exits:
        raise ValueError("exit times need a topology with exits")
    n = t.n
    A = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for b, row in t.kernel.items():
        for dest, p in row:
            if dest != ESCAPE:
                A[b - 1][dest - 1] -= p
    return solve_rational_linear(A, [Fraction(1)] * n)


def grid_exit_oracle(m: int) -> list[Fraction]:
    return exit_time_oracle(Topology(Kind.GRID2XM, m, True))


FORMULAS = {
    "e_save": (e_save, "n"),
    "e_random": (e_random_closed, "n"),
    "e_exit": (e_exit, "i n"),
    "e_exit_avg": (e_exit_avg, "n"),
    "e_sin": (e_sin, "n"),
    "e_approx": (e_approx, "n"),
    "random_open": (random_open_solve, "n"),
    "e2d": (e2d, "i m"),
    "e2d_avg": (e2d_avg, "m"),
}
