from fractions import Fraction
import math

import numpy as np
import pytest

from catbox.numerics import (ConvergenceError, SingularMatrixError, describe, dominant_eigenpair,
                             format_decimal, format_rational, identity, parse_rational,
                             solve_rational_linear, solve_tridiagonal)

F = Fraction


@pytest.mark.parametrize("text,value", [("39/16", F(39, 16)), ("3", F(3)), ("-4/6", F(-2, 3)),
                                        (" 7/2 ", F(7, 2))])
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("text", ["", "1/0", "a/b", "1.5", "1//2"])
def test_parse_rational_rejects(text):
    with pytest.raises(ValueError):
        parse_rational(text)


def test_format():
    assert format_rational(F(608, 141)) == "608/141"
    assert format_rational(F(3)) == "3"
    assert format_decimal(F(39, 16)) == "2.43750"
    assert describe(F(39, 16)) == "39/16 (2.43750)"
    for x in [F(1, 3), F(-22, 7), F(5)]:
        assert parse_rational(format_rational(x)) == x


def test_solve_identity():
    b = [F(1, 3), F(2), F(-5, 7)]
    assert solve_rational_linear(identity(3), b) == b


def test_solve_small_system():
    assert solve_rational_linear([[3, -1], [-1, 3]], [4, 4]) == [2, 2]


def test_solve_exact_residual():
    rng = np.random.default_rng(3)
    A = [[F(int(x), 7) for x in row] for row in rng.integers(-9, 10, (6, 6))]
    for i in range(6):
        A[i][i] += 20
    b = [F(int(x)) for x in rng.integers(-5, 6, 6)]
    x = solve_rational_linear(A, b)
    assert all(sum(A[i][j] * x[j] for j in range(6)) == b[i] for i in range(6))


def test_singular_vs_dimension():
    with pytest.raises(SingularMatrixError):
        solve_rational_linear([[1, 2], [2, 4]], [1, 1])
    with pytest.raises(ValueError) as exc:
        solve_rational_linear([[1, 2], [3, 4]], [1])
    assert not isinstance(exc.value, SingularMatrixError)


def test_tridiagonal_matches_dense():
    lower, diag, upper = [F(0)] + [F(-1)] * 3, [F(3)] * 4, [F(-1)] * 3 + [F(0)]
    rhs = [F(4)] * 4
    dense = [[diag[i] if i == j else (F(-1) if abs(i - j) == 1 else F(0)) for j in range(4)]
             for i in range(4)]
    assert solve_tridiagonal(lower, diag, upper, rhs) == solve_rational_linear(dense, rhs)


def test_eigen_diagonal():
    lam, v = dominant_eigenpair(np.diag([2.0, 1.0]))
    assert lam == pytest.approx(2.0, abs=1e-12)
    assert np.allclose(v, [1, 0], atol=1e-12)


def test_eigen_residual():
    M = np.array([[0.5, 0.2, 0.0], [0.1, 0.3, 0.4], [0.2, 0.1, 0.3]])
    lam, v = dominant_eigenpair(M, tol=1e-12)
    assert np.max(np.abs(M @ v - lam * v)) < 1e-10
    assert v.sum() == pytest.approx(1.0)
    assert lam == pytest.approx(max(abs(np.linalg.eigvals(M))), abs=1e-10)


def test_eigen_no_dominant():
    with pytest.raises(ConvergenceError):
        dominant_eigenpair(np.array([[0.0, 1.0], [1.0, 0.0]]), max_iter=1000, start=[1.0, 0.0])


def test_eigen_line7_cycle():
    from catbox.dynamics import cycle_map
    from catbox.topology import parse_topology
    cm = cycle_map(parse_topology("line:7:exits"), [2, 2, 6, 6], exact=False)
    lam, _ = dominant_eigenpair(np.array(cm.M, dtype=float))
    assert abs(lam - (3 + 2 * math.sqrt(2)) / 16) < 1e-10
