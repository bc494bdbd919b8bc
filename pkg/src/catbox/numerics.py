"""Exact rational linear algebra and a few float spectral helpers."""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

Rational = Fraction


class SingularMatrixError(ArithmeticError):
    pass


class ConvergenceError(ArithmeticError):
    pass


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` or an integer ``"p"``."""
    text = text.strip()
    num, sep, den = text.partition("/")
    try:
        if sep:
            return Fraction(int(num), int(den))
        return Fraction(int(num))
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a rational: {text!r}") from None


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_decimal(x, places: int = 5) -> str:
    return f"{float(x):.{places}f}"


def describe(x, places: int = 5) -> str:
    """``"39/16 (2.43750)"`` for rationals, plain decimal otherwise."""
    if isinstance(x, Fraction):
        return f"{format_rational(x)} ({format_decimal(x, places)})"
    return format_decimal(x, places)


def solve_rational_linear(A: Sequence[Sequence], b: Sequence) -> list[Fraction]:
    """Solve ``A x = b`` exactly.

    Rows are scaled to integers and reduced with fraction-free (Bareiss)
    elimination, so intermediate entries stay integral.
    """
    n = len(A)
    if n == 0 or any(len(row) != n for row in A) or len(b) != n:
        raise ValueError("solve_rational_linear needs a square system with matching rhs")

    M = []
    for row, rhs in zip(A, b):
        entries = [Fraction(v) for v in row] + [Fraction(rhs)]
        scale = lcm(*(e.denominator for e in entries))
        M.append([e.numerator * (scale // e.denominator) for e in entries])

    prev = 1
    for k in range(n):
        if M[k][k] == 0:
            for r in range(k + 1, n):
                if M[r][k] != 0:
                    M[k], M[r] = M[r], M[k]
                    break
            else:
                raise SingularMatrixError("matrix is singular")
        pivot = M[k][k]
        rowk = M[k]
        for i in range(k + 1, n):
            rowi = M[i]
            f = rowi[k]
            for j in range(k + 1, n + 1):
                rowi[j] = (rowi[j] * pivot - f * rowk[j]) // prev
            rowi[k] = 0
        prev = pivot

    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        acc = Fraction(M[i][n])
        for j in range(i + 1, n):
            if M[i][j]:
                acc -= M[i][j] * x[j]
        x[i] = acc / M[i][i]
    return x


def solve_tridiagonal(lower, diag, upper, rhs) -> list[Fraction]:
    """Exact Thomas algorithm; ``lower[0]`` and ``upper[-1]`` are ignored."""
    n = len(diag)
    c = [Fraction(0)] * n
    d = [Fraction(0)] * n
    for i in range(n):
        denom = Fraction(diag[i]) - (Fraction(lower[i]) * c[i - 1] if i else 0)
        if denom == 0:
            raise SingularMatrixError("zero pivot in tridiagonal solve")
        c[i] = Fraction(upper[i]) / denom if i < n - 1 else Fraction(0)
        d[i] = (Fraction(rhs[i]) - (Fraction(lower[i]) * d[i - 1] if i else 0)) / denom
    x = [Fraction(0)] * n
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def identity(n: int) -> list[list[Fraction]]:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def dominant_eigenpair(M, tol: float = 1e-12, max_iter: int = 1_000_000, start=None):
    """Power iteration for the dominant eigenvalue of ``M``.

    Stops when ``max|M v - lam v| < tol`` with ``v`` scaled to unit max-norm.
    The returned vector is normalised to sum 1 when its entries share a sign.
    Raises ``ConvergenceError`` if the cap is hit first.
    """
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("dominant_eigenpair needs a square matrix")
    v = np.ones(A.shape[0]) if start is None else np.array(start, dtype=float)
    v /= np.abs(v).max()
    for _ in range(max_iter):
        w = A @ v
        lam = float(v @ w / (v @ v))
        if np.abs(w - lam * v).max() < tol:
            break
        top = np.abs(w).max()
        if top == 0:
            raise ConvergenceError("iterate collapsed to zero")
        v = w / top
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")
    if np.all(v >= 0) or np.all(v <= 0):
        v = np.abs(v) / np.abs(v).sum()
    return lam, v
