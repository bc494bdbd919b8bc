from fractions import Fraction
import json
import math

import numpy as np
import pytest

from catbox.dynamics import (Distribution, apply_move, apply_open, cycle_map, move_vector,
                             play_trace, uniform_init)
from catbox.strategy import StrategyError, parse_strategy
from catbox.topology import move_kernel, parse_topology

F = Fraction


def test_uniform_init():
    assert uniform_init(parse_topology("line:3")).inbox == (F(1, 3),) * 3
    assert uniform_init(parse_topology("grid:2x2")).inbox == (F(1, 4),) * 4
    d = uniform_init(parse_topology("line:7:exits"))
    assert d.inbox == (F(1, 7),) * 7 and d.caught == 0 and d.escaped == 0


def test_apply_open():
    d, got = apply_open(uniform_init(parse_topology("line:3")), 2)
    assert d.inbox == (F(1, 3), 0, F(1, 3)) and got == F(1, 3) and d.caught == F(1, 3)
    d2, got2 = apply_open(d, 2)
    assert d2 == d and got2 == 0
    _, got = apply_open(uniform_init(parse_topology("line:7:exits")), 1)
    assert got == F(1, 7)


def test_apply_move():
    t = parse_topology("line:3")
    d, esc = apply_move(uniform_init(t), move_kernel(t))
    assert d.inbox == (F(1, 6), F(2, 3), F(1, 6)) and esc == 0
    t = parse_topology("line:3:exits")
    d, esc = apply_move(Distribution((F(1, 3), F(0), F(1, 3)), F(1, 3)), move_kernel(t))
    assert d.inbox == (0, F(1, 3), 0) and esc == F(1, 3)
    t = parse_topology("ring:3")
    d, _ = apply_move(Distribution((F(0), F(1, 2), F(1, 2))), move_kernel(t))
    assert d.inbox == (F(1, 2), F(1, 4), F(1, 4))


def test_trace_line4_exits_step3():
    t = parse_topology("line:4:exits")
    tr = play_trace(t, parse_strategy("(14414114)"), 3)
    assert tr.state(3).inbox == tuple(F(x, 32) for x in (3, 2, 3, 1))


def test_trace_line7_exits_after_four():
    t = parse_topology("line:7:exits")
    d = play_trace(t, parse_strategy("1661"), 4).state(4)
    assert list(d.inbox) + [d.escaped] == [F(x, 7 * 32) for x in (8, 14, 18, 22, 14, 8, 4, 36)]


def test_trace_line6_relative_step9():
    t = parse_topology("line:6")
    d = play_trace(t, parse_strategy("255233(5522)"), 9).state(9)
    assert d.relative() == tuple(F(x, 66) for x in (0, 20, 13, 15, 13, 5))


def test_trace_running_totals():
    t = parse_topology("line:5:exits")
    tr = play_trace(t, parse_strategy("144(141)"), 12)
    caught = escaped = F(0)
    for rec in tr.steps:
        caught += rec.caught
        escaped += rec.escaped
        assert rec.dist.caught == caught and rec.dist.escaped == escaped
        assert rec.dist.total == 1


def test_trace_exhausted():
    with pytest.raises(StrategyError):
        play_trace(parse_topology("line:4"), parse_strategy("23"), 4)
    tr = play_trace(parse_topology("line:4"), parse_strategy("2332"), 6)
    assert tr.state(len(tr)).alive == 0


def test_trace_dumps():
    tr = play_trace(parse_topology("line:3:exits"), parse_strategy("22"), 2)
    rows = json.loads(tr.to_json())
    assert [r["box"] for r in rows] == [2, 2]
    assert rows[0]["escaped"] == "1/3"
    assert "1/3" in tr.to_table()


def test_cycle_map_matches_propagation():
    t = parse_topology("line:7:exits")
    cm = cycle_map(t, [2, 2, 6, 6])
    for j in range(7):
        e = [F(0)] * 7
        e[j] = F(1)
        d = Distribution(tuple(e))
        for b in (2, 2, 6, 6):
            d, _ = apply_open(d, b)
            d, _ = apply_move(d, move_kernel(t))
        assert [cm.M[i][j] for i in range(7)] == list(d.inbox)
        assert cm.escaped_w[j] == d.escaped and cm.caught_w[j] == d.caught


def test_cycle_map_conservation():
    cm = cycle_map(parse_topology("line:4:exits"), [1, 4, 4, 1, 4, 1, 1, 4])
    for j in range(4):
        assert sum(cm.M[i][j] for i in range(4)) + cm.caught_w[j] + cm.escaped_w[j] == 1


def test_cycle_map_unreached_box():
    # the cat starting on box 1 of ring 4 is never in box 3 when box 3 is opened at odd steps
    cm = cycle_map(parse_topology("ring:4"), [3])
    assert cm.caught_w[1] == 0 and cm.caught_w[3] == 0


def test_sine_profile_is_eigenvector():
    for n in (3, 7, 11):
        t = parse_topology(f"line:{n}:exits")
        p = np.sin(np.arange(1, n + 1) * math.pi / (n + 1))
        q, _ = move_vector(list(p), move_kernel(t))
        assert np.allclose(q, math.cos(math.pi / (n + 1)) * p, atol=1e-12, rtol=0)
