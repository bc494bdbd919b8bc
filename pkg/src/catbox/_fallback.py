"""Pure-Python depth-first search kernel.

Reference twin of ``_core.pyx``: same node order, same float operations in
the same sequence, so node counts and values agree bit for bit.
"""
import math
import threading

KIND_NONE, KIND_FINITE, KIND_REPEAT, KIND_COMPLETION = 0, 1, 2, 3
MAX_SIM_STEPS = 5000
SIM_EPS = 1e-15
_shared_lock = threading.Lock()


def _move(v, out, nbr, prob, deg, escp, n):
    for j in range(n):
        out[j] = 0.0
    esc = 0.0
    for i in range(n):
        m = v[i]
        if m != 0.0:
            for k in range(deg[i]):
                out[nbr[i][k]] += m * prob[i][k]
            esc += m * escp[i]
    return esc


def _total(v, n):
    r = 0.0
    for j in range(n):
        r += v[j]
    return r


class _Search:
    def __init__(self, nbr, prob, deg, escp, root, root_cost, root_esc, first_mask,
                 objective, maxdepth, bound, tol, eps, lookahead, completions,
                 max_period, rep_tol, prune_empty, max_nodes, shared, opt_cap, cut_repeats):
        n = len(root)
        self.n = n
        self.nbr = [list(map(int, row)) for row in nbr]
        self.prob = [list(map(float, row)) for row in prob]
        self.deg = list(map(int, deg))
        self.escp = list(map(float, escp))
        self.first_mask = list(map(int, first_mask))
        self.objective = int(objective)
        self.maxdepth = int(maxdepth)
        self.bound = float(bound)
        self.tol = float(tol)
        self.eps = float(eps)
        self.slack = max(self.tol, self.eps)
        self.lookahead = bool(lookahead)
        self.completions = bool(completions)
        self.max_period = int(max_period)
        self.rep_tol = float(rep_tol)
        self.prune_empty = bool(prune_empty)
        self.max_nodes = int(max_nodes)
        self.shared = shared
        self.opt_cap = int(opt_cap)
        self.cut_repeats = bool(cut_repeats)

        D = self.maxdepth + 1
        self.V = [[0.0] * n for _ in range(D)]
        self.REL = [[0.0] * n for _ in range(D)]
        self.A = [0.0] * D
        self.E = [0.0] * D
        self.R = [0.0] * D
        self.path = [0] * max(self.maxdepth, 1)
        self.sim_v = [0.0] * n
        self.sim_w = [0.0] * n

        for j in range(n):
            self.V[0][j] = float(root[j])
        self.A[0] = float(root_cost)
        self.E[0] = float(root_esc)
        self.R[0] = _total(self.V[0], n)
        self._relative(0)

        self.best_p1 = math.inf
        self.best_p2 = math.inf
        self.best_path = []
        self.best_kind = KIND_NONE
        self.best_len = 0
        self.best_per = 0
        self.nodes = 0
        self.pruned = 0
        self.max_prune_depth = -1
        self.open_leaves = 0
        self.leaf_min_lb = math.inf
        self.truncated = False
        self.repeat_cuts = 0
        self.optima = []
        self.opt_lost = math.inf       # smallest value turned away because the list was full

    def _relative(self, d):
        r = self.R[d]
        V, REL = self.V[d], self.REL[d]
        for j in range(self.n):
            REL[j] = V[j] / r if r > 0.0 else 0.0

    def _threshold(self):
        t = self.bound
        if self.best_p1 < t:
            t = self.best_p1
        if self.shared is not None and self.shared[0] < t:
            t = self.shared[0]
        return t

    def _lower_bound(self, d):
        v = self.V[d]
        n = self.n
        if self.objective == 0:
            lb = self.A[d] + self.R[d]
            if self.lookahead and self.R[d] > 0.0:
                top = 0.0
                out = 0.0
                for j in range(n):
                    if v[j] > top:
                        top = v[j]
                    out += v[j] * self.escp[j]
                extra = self.R[d] - top - out
                if extra > 0.0:
                    lb += extra
            return lb
        lb = self.E[d]
        if self.lookahead and self.R[d] > 0.0:
            top = 0.0
            out = 0.0
            for j in range(n):
                x = v[j] * self.escp[j]
                out += x
                if x > top:
                    top = x
            lb += out - top
        return lb

    def _offer(self, p1, p2, kind, d, per):
        tol = self.tol
        if p1 < self.best_p1 - tol or (p1 <= self.best_p1 + tol and p2 < self.best_p2 - tol):
            self.best_p1 = p1
            self.best_p2 = p2
            self.best_path = self.path[:d]
            self.best_kind = kind
            self.best_len = d
            self.best_per = per
            if self.shared is not None:
                with _shared_lock:
                    if p1 < self.shared[0]:
                        self.shared[0] = p1
            if self.eps >= 0.0:
                limit = self.best_p1 + self.eps
                self.optima = [o for o in self.optima if o[4] <= limit]
        if self.eps >= 0.0 and p1 <= self.best_p1 + self.eps:
            if len(self.optima) < self.opt_cap:
                self.optima.append((tuple(self.path[:d]), kind, d, per, p1, p2))
            elif p1 < self.opt_lost:
                self.opt_lost = p1

    def _repetition(self, d):
        n = self.n
        cur = self.REL[d]
        top = min(self.max_period, d)
        for p in range(1, top + 1):
            if self.R[d - p] <= 0.0:
                continue
            prev = self.REL[d - p]
            same = True
            for j in range(n):
                if abs(cur[j] - prev[j]) > self.rep_tol:
                    same = False
                    break
            if same:
                lam = self.R[d] / self.R[d - p]
                if lam < 1.0 - 1e-12:
                    g = lam / (1.0 - lam)
                    dur = self.A[d] + (self.A[d] - self.A[d - p]) * g
                    esc = self.E[d] + (self.E[d] - self.E[d - p]) * g
                    if self.objective == 0:
                        self._offer(dur, 0.0, KIND_REPEAT, d, p)
                    else:
                        self._offer(esc, dur, KIND_REPEAT, d, p)
                return True
        return False

    def _complete(self, d):
        n = self.n
        v, w = self.sim_v, self.sim_w
        top = min(self.max_period, d)
        for p in range(1, top + 1):
            for j in range(n):
                v[j] = self.V[d][j]
            a = self.A[d]
            e = self.E[d]
            r = self.R[d]
            thr = self._threshold() + self.slack
            ok = False
            for k in range(MAX_SIM_STEPS):
                b = self.path[d - p + k % p]
                a += r
                v[b] = 0.0
                e += _move(v, w, self.nbr, self.prob, self.deg, self.escp, n)
                v, w = w, v
                r = _total(v, n)
                if self.objective == 0:
                    if a > thr:
                        break
                elif e > thr:
                    break
                if r < SIM_EPS:
                    ok = True
                    break
            if ok:
                a += r
                if self.objective == 0:
                    self._offer(a, 0.0, KIND_COMPLETION, d, p)
                else:
                    self._offer(e, a, KIND_COMPLETION, d, p)
        self.sim_v, self.sim_w = v, w

    def visit(self, d):
        if self.truncated:
            return
        self.nodes += 1
        if self.nodes > self.max_nodes:
            self.truncated = True
            return
        lb = self._lower_bound(d)
        if lb > self._threshold() + self.slack:
            self.pruned += 1
            if d > self.max_prune_depth:
                self.max_prune_depth = d
            return
        if self.R[d] <= 0.0:
            if self.objective == 0:
                self._offer(self.A[d], 0.0, KIND_FINITE, d, 0)
            else:
                self._offer(self.E[d], self.A[d], KIND_FINITE, d, 0)
            return
        if d >= 1 and self._repetition(d) and self.cut_repeats:
            # the subtree is a scaled copy of the one below the earlier node
            self.repeat_cuts += 1
            return
        if d == self.maxdepth:
            self.open_leaves += 1
            if lb < self.leaf_min_lb:
                self.leaf_min_lb = lb
            if self.completions:
                self._complete(d)
            return
        n = self.n
        V = self.V[d]
        child = self.V[d + 1]
        for b in range(n):
            if d == 0 and not self.first_mask[b]:
                continue
            if self.prune_empty and V[b] == 0.0:
                continue
            saved = V[b]
            V[b] = 0.0
            esc = _move(V, child, self.nbr, self.prob, self.deg, self.escp, n)
            V[b] = saved
            self.A[d + 1] = self.A[d] + self.R[d]
            self.E[d + 1] = self.E[d] + esc
            self.R[d + 1] = _total(child, n)
            self._relative(d + 1)
            self.path[d] = b
            self.visit(d + 1)
            if self.truncated:
                return

    def result(self):
        return {
            "best_p1": self.best_p1, "best_p2": self.best_p2,
            "best_path": list(self.best_path), "best_kind": self.best_kind,
            "best_len": self.best_len, "best_per": self.best_per,
            "nodes": self.nodes, "pruned": self.pruned,
            "max_prune_depth": self.max_prune_depth, "open_leaves": self.open_leaves,
            "leaf_min_lb": self.leaf_min_lb, "truncated": self.truncated,
            "repeat_cuts": self.repeat_cuts,
            "optima": list(self.optima), "optima_overflow": self.opt_lost <= self.best_p1 + self.eps,
        }


def dfs_search(nbr, prob, deg, escp, root, root_cost, root_esc, first_mask,
               objective, maxdepth, bound, tol, eps, lookahead, completions,
               max_period, rep_tol, prune_empty, max_nodes, shared=None, opt_cap=4096,
               cut_repeats=False):
    s = _Search(nbr, prob, deg, escp, root, root_cost, root_esc, first_mask,
                objective, maxdepth, bound, tol, eps, lookahead, completions,
                max_period, rep_tol, prune_empty, max_nodes, shared, opt_cap, cut_repeats)
    s.visit(0)
    return s.result()
