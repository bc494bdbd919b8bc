"""Expected game duration and escape rate of a strategy.

The prefix is played out directly.  The repeated cycle is summed in closed
form: with ``M`` the cycle map restricted to the boxes the post-prefix mass
can reach, ``x = (I - M)^-1 v`` collects the mass entering every future pass
and ``y = (I - M)^-1 M x`` the same mass weighted by the pass index, so the
tail of every objective is a dot product with ``x`` or ``y``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dynamics import (CycleMap, Distribution, apply_move, apply_open, cycle_map,
                       play_trace, uniform_init)
from .numerics import (SingularMatrixError, dominant_eigenpair, format_rational,
                       solve_rational_linear)
from .strategy import Strategy, sweep_strategy
from .topology import Topology, symmetries


class EvaluationError(ArithmeticError):
    pass


class UnresolvedStrategyError(EvaluationError):
    """A finite strategy ends while cats are still in the boxes."""


class DivergentStrategyError(EvaluationError):
    """Some cat mass is never caught and never escapes."""


@dataclass(frozen=True)
class RepetitionCertificate:
    t0: int
    period: int
    factor: Fraction


@dataclass
class EvalResult:
    duration: object
    escape_rate: object
    caught_rate: object
    exact: bool = True
    diagnosis: str = "resolved"
    bound: float = 0.0
    certificate: RepetitionCertificate | None = None

    def as_dict(self) -> dict:
        def fmt(x):
            return format_rational(x) if isinstance(x, Fraction) else float(x)

        out = {"duration": fmt(self.duration), "escape_rate": fmt(self.escape_rate),
               "caught_rate": fmt(self.caught_rate), "exact": self.exact,
               "diagnosis": self.diagnosis}
        if not self.exact:
            out["bound"] = self.bound
        if self.certificate is not None:
            c = self.certificate
            out["certificate"] = {"t0": c.t0, "period": c.period, "factor": format_rational(c.factor)}
        return out


def _float_init(t: Topology, init) -> Distribution:
    if init is None:
        return Distribution(tuple(1.0 / t.n for _ in t.boxes), 0.0, 0.0)
    if isinstance(init, Distribution):
        return Distribution(tuple(float(x) for x in init.inbox), float(init.caught), float(init.escaped))
    return Distribution(tuple(float(x) for x in init), 0.0, 0.0)


def _exact_init(t: Topology, init) -> Distribution:
    if init is None:
        return uniform_init(t)
    if isinstance(init, Distribution):
        return init
    return Distribution(tuple(Fraction(x) for x in init))


def _play_prefix(t: Topology, prefix, d: Distribution):
    """Play the prefix; returns (distribution, sum of step * terminated mass)."""
    kernel = t.kernel
    if not isinstance(d.caught, Fraction):
        kernel = {b: [(dst, float(p)) for dst, p in row] for b, row in kernel.items()}
    weighted = d.caught * 0
    for k, b in enumerate(prefix, start=1):
        d, got = apply_open(d, b)
        d, esc = apply_move(d, kernel)
        weighted += k * (got + esc)
    return d, weighted


def reachable_support(M, start) -> list[int]:
    """Indices reachable from the nonzero entries of ``start`` under ``M``."""
    n = len(M)
    seen = [i for i in range(n) if start[i]]
    marked = set(seen)
    stack = list(seen)
    while stack:
        i = stack.pop()
        for j in range(n):
            if M[j][i] and j not in marked:
                marked.add(j)
                stack.append(j)
    return sorted(marked)


def _solve(A, b, exact):
    if exact:
        return solve_rational_linear(A, b)
    A = np.asarray(A, dtype=float)
    if np.linalg.cond(A) > 1e14:
        raise SingularMatrixError("matrix is numerically singular")
    return list(np.linalg.solve(A, np.asarray(b, dtype=float)))


def _cycle_tail(cm: CycleMap, v, k: int, exact: bool):
    """Caught, escaped and duration contributions of all passes through the cycle.

    ``v`` enters the first pass at global step offset ``k``.
    """
    zero = Fraction(0) if exact else 0.0
    S = reachable_support(cm.M, v)
    if not S:
        return zero, zero, zero
    A = [[(1 if i == j else 0) - cm.M[i][j] for j in S] for i in S]
    vs = [v[i] for i in S]
    try:
        x = _solve(A, vs, exact)
        Mx = [sum(cm.M[i][j] * xj for j, xj in zip(S, x)) for i in S]
        y = _solve(A, Mx, exact)
    except SingularMatrixError:
        raise DivergentStrategyError("cycle map has eigenvalue 1 on the reachable boxes") from None
    ell = len(cm.cycle)
    caught = sum((cm.caught_w[i] * xi for i, xi in zip(S, x)), zero)
    escaped = sum((cm.escaped_w[i] * xi for i, xi in zip(S, x)), zero)
    end_x = caught + escaped
    end_y = sum((cm.end_w[i] * yi for i, yi in zip(S, y)), zero)
    duration = k * end_x + ell * end_y + sum((cm.duration_w[i] * xi for i, xi in zip(S, x)), zero)
    return caught, escaped, duration


def evaluate_strategy(t: Topology, s: Strategy, init=None, exact: bool = True) -> EvalResult:
    """Exact (or float, with ``exact=False``) expected duration and escape rate.

    ``init`` defaults to the uniform start; a ``Distribution`` or a plain box
    vector may be given instead (a vector is taken as the state before step 1).
    """
    d = _exact_init(t, init) if exact else _float_init(t, init)
    base_c, base_e = d.caught, d.escaped
    d, weighted = _play_prefix(t, s.prefix, d)
    caught, escaped, duration = d.caught, d.escaped, weighted
    if d.alive:
        if s.finite:
            raise UnresolvedStrategyError(
                f"finite strategy leaves {float(d.alive):.3g} of the cat mass in the boxes")
        cm = cycle_map(t, s.cycle, exact)
        c, e, dur = _cycle_tail(cm, list(d.inbox), len(s.prefix), exact)
        caught, escaped, duration = caught + c, escaped + e, duration + dur
    return EvalResult(duration, escaped - base_e, caught - base_c, exact)


def evaluate_certified(t: Topology, s: Strategy, completion: Strategy | None = None) -> EvalResult:
    """Bracket the value of a finite strategy that leaves cat mass behind.

    Lower bounds assume the remaining mass ends one step after the prefix; the
    upper bounds come from exactly evaluating the prefix followed by
    ``completion`` (a sweep by default).  The reported values are the interval
    midpoints and ``bound`` is the largest half-width.
    """
    if s.cycle:
        return evaluate_strategy(t, s)
    d, weighted = _play_prefix(t, s.prefix, uniform_init(t))
    if not d.alive:
        return evaluate_strategy(t, s)
    k, r = len(s.prefix), d.alive
    if completion is None:
        completion = sweep_strategy(t.n) if t.n > 2 else Strategy((1, 1))
    upper = evaluate_strategy(t, Strategy(s.prefix + completion.prefix, completion.cycle))
    lo = {"duration": weighted + (k + 1) * r, "escape_rate": d.escaped, "caught_rate": d.caught}
    hi = {"duration": upper.duration, "escape_rate": upper.escape_rate if t.exits else d.escaped,
          "caught_rate": d.caught + r}
    mid = {key: (lo[key] + hi[key]) / 2 for key in lo}
    bound = max(float(hi[key] - lo[key]) / 2 for key in lo)
    return EvalResult(float(mid["duration"]), float(mid["escape_rate"]), float(mid["caught_rate"]),
                      exact=False, diagnosis=f"truncated after {k} steps, {float(r):.3e} mass left",
                      bound=bound)


def detect_scaled_repetition(trace, max_period: int = 12, cycle_length: int = 1,
                             prefix_length: int = 0) -> RepetitionCertificate | None:
    """Earliest ``(t0, period)`` where the relative inbox repeats exactly.

    Periods are multiples of ``cycle_length`` and ``t0`` is at least
    ``prefix_length`` so that the openings after ``t0`` and ``t0 + period``
    coincide.
    """
    rel = [trace.state(t).relative() if trace.state(t).alive else None
           for t in range(len(trace) + 1)]
    for t0 in range(prefix_length, len(trace) + 1):
        if rel[t0] is None:
            continue
        for period in range(cycle_length, max_period + 1, cycle_length):
            t1 = t0 + period
            if t1 > len(trace):
                break
            if rel[t1] == rel[t0]:
                factor = trace.state(t1).alive / trace.state(t0).alive
                return RepetitionCertificate(t0, period, Fraction(factor))
    return None


def repetition_of(t: Topology, s: Strategy, steps: int = 120, max_period: int = 12):
    """Play ``s`` and look for an exact scaled repetition."""
    if s.finite:
        return None
    trace = play_trace(t, s, steps)
    return detect_scaled_repetition(trace, max_period, len(s.cycle), len(s.prefix))


def symmetric_repetition_of(t: Topology, s: Strategy, steps: int = 120, max_period: int = 12):
    """Earliest ``(t0, period, sigma)`` where the relative inbox at ``t0 + period``
    is the image under the symmetry ``sigma`` of the one at ``t0`` and the
    openings after ``t0 + period`` are the images of those after ``t0``.

    With ``sigma`` the identity this is the exact repetition; a mirror can
    close the cycle earlier (the line-5 cycle 2442 mirrors itself after two
    steps).
    """
    if s.finite:
        return None
    trace = play_trace(t, s, steps)
    rel = [trace.state(k).relative() if trace.state(k).alive else None for k in range(len(trace) + 1)]
    window = len(s.prefix) + 2 * len(s.cycle) + max_period
    for t0 in range(len(rel)):
        if rel[t0] is None:
            continue
        for period in range(1, max_period + 1):
            t1 = t0 + period
            if t1 >= len(rel) or rel[t1] is None:
                break
            for sigma in symmetries(t):
                if any(rel[t1][sigma[i] - 1] != rel[t0][i] for i in range(t.n)):
                    continue
                if all(sigma[s.box_at(t0 + i) - 1] == s.box_at(t1 + i) for i in range(1, window + 1)):
                    factor = trace.state(t1).alive / trace.state(t0).alive
                    return RepetitionCertificate(t0, period, Fraction(factor)), sigma
    return None


def geometric_evaluation(t: Topology, s: Strategy, cert: RepetitionCertificate) -> EvalResult:
    """Closed-form value from a scaled repetition: the period repeats with mass x factor."""
    trace = play_trace(t, s, cert.t0 + cert.period)
    lam = cert.factor

    def weighted(a, b):
        return sum((r.step * (r.caught + r.escaped) for r in trace.steps[a:b]), Fraction(0))

    head = weighted(0, cert.t0)
    per = trace.steps[cert.t0:cert.t0 + cert.period]
    per_c = sum((r.caught for r in per), Fraction(0))
    per_e = sum((r.escaped for r in per), Fraction(0))
    per_w = weighted(cert.t0, cert.t0 + cert.period)
    g = 1 / (1 - lam)
    # pass j contributes lam^j * (per_w + j * period * (per_c + per_e))
    duration = head + per_w * g + cert.period * (per_c + per_e) * lam * g * g
    pre = trace.state(cert.t0)
    caught = pre.caught + per_c * g
    escaped = pre.escaped + per_e * g
    return EvalResult(duration, escaped, caught, True, "scaled repetition", certificate=cert)


def asymptotic_profile(t: Topology, s: Strategy, phase: int = 0, tol: float = 1e-13):
    """Limit of the relative inbox at cycle entry, and the per-cycle decay factor.

    Power iteration on the float cycle map starts from the state after the
    prefix, so with a degenerate dominant eigenvalue the limit is the one the
    actual game approaches.  ``phase`` advances the profile by that many steps
    of the cycle (each step renormalised).
    """
    if s.finite:
        raise EvaluationError("asymptotic profile needs a cyclic strategy")
    d, _ = _play_prefix(t, s.prefix, _float_init(t, None))
    cm = cycle_map(t, s.cycle, exact=False)
    lam, v = dominant_eigenpair(cm.M, tol=tol, start=list(d.inbox))
    kernel = {b: [(dst, float(p)) for dst, p in row] for b, row in t.kernel.items()}
    prof = Distribution(tuple(v), 0.0, 0.0)
    for b in s.cycle[:phase % len(s.cycle)]:
        prof, _ = apply_open(prof, b)
        prof, _ = apply_move(prof, kernel)
        prof = Distribution(prof.relative(), 0.0, 0.0)
    return np.array(prof.inbox), lam
