"""Randomised invariants (run alone with ``pytest tests/test_properties.py``)."""
from fractions import Fraction

from hypothesis import assume, given, settings, strategies as st

from catbox.dynamics import apply_move, apply_open, play_trace, uniform_init
from catbox.evaluate import EvaluationError, evaluate_strategy
from catbox.search import Objective, lower_bound
from catbox.strategy import Strategy, format_strategy, mirror_strategy, parse_strategy
from catbox.topology import ESCAPE, move_kernel, parse_topology, symmetries

TOPOLOGIES = ["line:2", "line:4", "line:5", "line:6:exits", "line:7", "line:7:exits", "ring:3",
              "ring:5", "ring:6", "grid:2x2", "grid:2x3", "grid:2x2:exits", "grid:2x3:exits"]

topologies = st.sampled_from(TOPOLOGIES).map(parse_topology)


@st.composite
def topology_and_strategy(draw, min_cycle=0, max_len=6):
    t = draw(topologies)
    box = st.integers(1, t.n)
    prefix = draw(st.lists(box, max_size=max_len))
    cycle = draw(st.lists(box, min_size=max(min_cycle, 0 if prefix else 1), max_size=max_len))
    return t, Strategy(tuple(prefix), tuple(cycle))


@st.composite
def distributions(draw, t):
    w = draw(st.lists(st.integers(0, 20), min_size=t.n + 2, max_size=t.n + 2))
    assume(sum(w) > 0)
    total = sum(w)
    from catbox.dynamics import Distribution
    return Distribution(tuple(Fraction(x, total) for x in w[:t.n]), Fraction(w[t.n], total),
                        Fraction(w[t.n + 1], total))


@given(data=st.data(), t=topologies)
def test_conservation_each_operator(data, t):
    d = data.draw(distributions(t))
    box = data.draw(st.integers(1, t.n))
    d1, got = apply_open(d, box)
    assert d1.total == 1 and d1.caught == d.caught + got and d1.escaped == d.escaped
    d2, esc = apply_move(d1, move_kernel(t))
    assert d2.total == 1 and d2.escaped == d1.escaped + esc and d2.caught == d1.caught
    assert all(x >= 0 for x in d2.inbox)


@given(ts=topology_and_strategy(min_cycle=1), steps=st.integers(1, 25))
def test_conservation_along_traces(ts, steps):
    t, s = ts
    for rec in play_trace(t, s, steps).steps:
        assert rec.dist.total == 1


@given(t=topologies)
def test_kernel_rows(t):
    for b, row in move_kernel(t).items():
        assert sum(p for _, p in row) == 1
        assert all(d == ESCAPE or 1 <= d <= t.n for d, _ in row)
        if not t.exits:
            assert all(d != ESCAPE for d, _ in row)


@settings(max_examples=60, deadline=None)
@given(ts=topology_and_strategy(min_cycle=1))
def test_mirror_invariance(ts):
    t, s = ts
    try:
        base = evaluate_strategy(t, s)
    except EvaluationError:
        assume(False)
    for sig in symmetries(t):
        m = evaluate_strategy(t, mirror_strategy(s, sig))
        assert (m.duration, m.escape_rate) == (base.duration, base.escape_rate)


@given(ts=topology_and_strategy(max_len=9))
def test_parse_format_roundtrip(ts):
    t, s = ts
    assert parse_strategy(format_strategy(s), t) == s
    assert parse_strategy(format_strategy(s, t), t) == s
    comma = ",".join(map(str, s.prefix)) + ("(" + ",".join(map(str, s.cycle)) + ")" if s.cycle else "")
    if len(s.prefix) + len(s.cycle) > 1:
        assert parse_strategy(comma, t) == s


@given(boxes=st.lists(st.integers(1, 24), min_size=1, max_size=8))
def test_roundtrip_wide(boxes):
    t = parse_topology("line:24")
    s = Strategy(tuple(boxes[:-1]), (boxes[-1],))
    assert parse_strategy(format_strategy(s, t), t) == s


@given(openings=st.lists(st.integers(1, 7), min_size=1, max_size=20), start_odd=st.booleans())
def test_parity_never_mixes(openings, start_odd):
    t = parse_topology("line:7")
    from catbox.dynamics import Distribution
    init = Distribution(tuple(Fraction(1, 4) if (i % 2 == 1) == start_odd else Fraction(0)
                              for i in range(1, 8)) if start_odd else
                        tuple(Fraction(1, 3) if i % 2 == 0 else Fraction(0) for i in range(1, 8)))
    d = init
    for k, b in enumerate(openings, 1):
        d, _ = apply_open(d, b)
        d, _ = apply_move(d, move_kernel(t))
        # after k moves the population sits on the parity class start + k
        want_odd = start_odd != (k % 2 == 1)
        assert all(x == 0 for i, x in enumerate(d.inbox, 1) if (i % 2 == 1) != want_odd)


@settings(max_examples=80, deadline=None)
@given(data=st.data())
def test_lower_bound_sound(data):
    t = data.draw(topologies)
    obj = Objective.MIN_ESCAPE if t.exits else Objective.MIN_DURATION
    box = st.integers(1, t.n)
    prefix = data.draw(st.lists(box, min_size=1, max_size=8))
    cycle = data.draw(st.lists(box, min_size=1, max_size=6))
    s = Strategy(tuple(prefix), tuple(cycle))
    try:
        res = evaluate_strategy(t, s)
    except EvaluationError:
        assume(False)
    tr = play_trace(t, s, len(prefix))
    weighted = sum(r.step * (r.caught + r.escaped) for r in tr.steps)
    d = tr.state(len(prefix))
    value = res.escape_rate if t.exits else res.duration
    for la in (False, True):
        assert lower_bound(d, len(prefix), obj, weighted, lookahead=la, t=t) <= value
