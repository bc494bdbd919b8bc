# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled depth-first search kernel; twin of ``_fallback.py``.

The recursion runs without the GIL.  Optima are written to preallocated
buffers and a shared incumbent cell lets parallel subtree searches tighten
each other's pruning threshold.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY, fabs
from libc.string cimport memcpy

cnp.import_array()

cdef extern from *:
    """
    #include <stdint.h>
    #include <string.h>
    static inline double catbox_load(double *p) {
        uint64_t bits = __atomic_load_n((uint64_t *)p, __ATOMIC_SEQ_CST);
        double v;
        memcpy(&v, &bits, sizeof v);
        return v;
    }
    static inline void catbox_atomic_min(double *p, double v) {
        uint64_t old = __atomic_load_n((uint64_t *)p, __ATOMIC_SEQ_CST), nv;
        double cur;
        for (;;) {
            memcpy(&cur, &old, sizeof cur);
            if (!(v < cur)) return;
            memcpy(&nv, &v, sizeof nv);
            if (__atomic_compare_exchange_n((uint64_t *)p, &old, nv, 0,
                                            __ATOMIC_SEQ_CST, __ATOMIC_SEQ_CST)) return;
        }
    }
    """
    double catbox_load(double *p) nogil
    void catbox_atomic_min(double *p, double v) nogil

DEF MAX_SIM_STEPS = 5000
DEF SIM_EPS = 1e-15

cdef enum:
    KIND_NONE = 0
    KIND_FINITE = 1
    KIND_REPEAT = 2
    KIND_COMPLETION = 3


cdef struct Ctx:
    int n
    int maxdepth
    int objective
    int lookahead
    int completions
    int max_period
    int prune_empty
    int cut_repeats
    long long max_nodes
    double bound
    double tol
    double eps
    double slack
    double rep_tol
    int *nbr          # n x 4
    double *prob      # n x 4
    int *deg
    double *escp
    unsigned char *first_mask
    double *V         # (maxdepth+1) x n
    double *REL
    double *A
    double *E
    double *R
    int *path
    double *sim_v
    double *sim_w
    double *shared
    # best
    double best_p1
    double best_p2
    int *best_path
    int best_kind
    int best_len
    int best_per
    # stats
    long long nodes
    long long pruned
    int max_prune_depth
    long long open_leaves
    double leaf_min_lb
    int truncated
    long long repeat_cuts
    # optima buffers
    int opt_cap
    int opt_count
    double opt_lost   # smallest value turned away because the buffer was full
    int *opt_path     # opt_cap x maxdepth
    int *opt_meta     # opt_cap x 3: kind, len, per
    double *opt_val   # opt_cap x 2


cdef inline double _move(Ctx *c, double *v, double *out) noexcept nogil:
    cdef int n = c.n, i, j, k
    cdef double m, esc = 0.0
    for j in range(n):
        out[j] = 0.0
    for i in range(n):
        m = v[i]
        if m != 0.0:
            for k in range(c.deg[i]):
                out[c.nbr[4 * i + k]] += m * c.prob[4 * i + k]
            esc += m * c.escp[i]
    return esc


cdef inline double _total(double *v, int n) noexcept nogil:
    cdef double r = 0.0
    cdef int j
    for j in range(n):
        r += v[j]
    return r


cdef inline void _relative(Ctx *c, int d) noexcept nogil:
    cdef int j, n = c.n
    cdef double r = c.R[d]
    for j in range(n):
        c.REL[d * n + j] = c.V[d * n + j] / r if r > 0.0 else 0.0


cdef inline double _threshold(Ctx *c) noexcept nogil:
    cdef double s, t = c.bound
    if c.best_p1 < t:
        t = c.best_p1
    if c.shared != NULL:
        s = catbox_load(c.shared)
        if s < t:
            t = s
    return t


cdef double _lower_bound(Ctx *c, int d) noexcept nogil:
    cdef int j, n = c.n
    cdef double *v = c.V + d * n
    cdef double lb, top, out, extra, x
    if c.objective == 0:
        lb = c.A[d] + c.R[d]
        if c.lookahead and c.R[d] > 0.0:
            top = 0.0
            out = 0.0
            for j in range(n):
                if v[j] > top:
                    top = v[j]
                out += v[j] * c.escp[j]
            extra = c.R[d] - top - out
            if extra > 0.0:
                lb += extra
        return lb
    lb = c.E[d]
    if c.lookahead and c.R[d] > 0.0:
        top = 0.0
        out = 0.0
        for j in range(n):
            x = v[j] * c.escp[j]
            out += x
            if x > top:
                top = x
        lb += out - top
    return lb


cdef void _offer(Ctx *c, double p1, double p2, int kind, int d, int per) noexcept nogil:
    cdef double tol = c.tol
    cdef int j
    if p1 < c.best_p1 - tol or (p1 <= c.best_p1 + tol and p2 < c.best_p2 - tol):
        c.best_p1 = p1
        c.best_p2 = p2
        for j in range(d):
            c.best_path[j] = c.path[j]
        c.best_kind = kind
        c.best_len = d
        c.best_per = per
        if c.shared != NULL:
            catbox_atomic_min(c.shared, p1)
        if c.eps >= 0.0:
            _compact_optima(c)
    if c.eps >= 0.0 and p1 <= c.best_p1 + c.eps:
        if c.opt_count < c.opt_cap:
            for j in range(d):
                c.opt_path[c.opt_count * c.maxdepth + j] = c.path[j]
            c.opt_meta[3 * c.opt_count] = kind
            c.opt_meta[3 * c.opt_count + 1] = d
            c.opt_meta[3 * c.opt_count + 2] = per
            c.opt_val[2 * c.opt_count] = p1
            c.opt_val[2 * c.opt_count + 1] = p2
            c.opt_count += 1
        elif p1 < c.opt_lost:
            c.opt_lost = p1


cdef void _compact_optima(Ctx *c) noexcept nogil:
    # keep only entries still within eps of the improved incumbent
    cdef int i, j, k = 0
    cdef double limit = c.best_p1 + c.eps
    for i in range(c.opt_count):
        if c.opt_val[2 * i] <= limit:
            if k != i:
                for j in range(c.opt_meta[3 * i + 1]):
                    c.opt_path[k * c.maxdepth + j] = c.opt_path[i * c.maxdepth + j]
                for j in range(3):
                    c.opt_meta[3 * k + j] = c.opt_meta[3 * i + j]
                c.opt_val[2 * k] = c.opt_val[2 * i]
                c.opt_val[2 * k + 1] = c.opt_val[2 * i + 1]
            k += 1
    c.opt_count = k


cdef int _repetition(Ctx *c, int d) noexcept nogil:
    cdef int n = c.n, p, j, top, same
    cdef double *cur = c.REL + d * n
    cdef double *prev
    cdef double lam, g, dur, esc
    top = c.max_period if c.max_period < d else d
    for p in range(1, top + 1):
        if c.R[d - p] <= 0.0:
            continue
        prev = c.REL + (d - p) * n
        same = 1
        for j in range(n):
            if fabs(cur[j] - prev[j]) > c.rep_tol:
                same = 0
                break
        if same:
            lam = c.R[d] / c.R[d - p]
            if lam < 1.0 - 1e-12:
                g = lam / (1.0 - lam)
                dur = c.A[d] + (c.A[d] - c.A[d - p]) * g
                esc = c.E[d] + (c.E[d] - c.E[d - p]) * g
                if c.objective == 0:
                    _offer(c, dur, 0.0, KIND_REPEAT, d, p)
                else:
                    _offer(c, esc, dur, KIND_REPEAT, d, p)
            return 1
    return 0


cdef void _complete(Ctx *c, int d) noexcept nogil:
    cdef int n = c.n, p, j, k, b, top, ok
    cdef double a, e, r, thr
    cdef double *v = c.sim_v
    cdef double *w = c.sim_w
    cdef double *tmp
    top = c.max_period if c.max_period < d else d
    for p in range(1, top + 1):
        for j in range(n):
            v[j] = c.V[d * n + j]
        a = c.A[d]
        e = c.E[d]
        r = c.R[d]
        thr = _threshold(c) + c.slack
        ok = 0
        for k in range(MAX_SIM_STEPS):
            b = c.path[d - p + k % p]
            a += r
            v[b] = 0.0
            e += _move(c, v, w)
            tmp = v
            v = w
            w = tmp
            r = _total(v, n)
            if c.objective == 0:
                if a > thr:
                    break
            elif e > thr:
                break
            if r < SIM_EPS:
                ok = 1
                break
        if ok:
            a += r
            if c.objective == 0:
                _offer(c, a, 0.0, KIND_COMPLETION, d, p)
            else:
                _offer(c, e, a, KIND_COMPLETION, d, p)
    c.sim_v = v
    c.sim_w = w


cdef void _visit(Ctx *c, int d) noexcept nogil:
    cdef int n = c.n, b
    cdef double lb, saved, esc
    cdef double *V
    cdef double *child
    if c.truncated:
        return
    c.nodes += 1
    if c.nodes > c.max_nodes:
        c.truncated = 1
        return
    lb = _lower_bound(c, d)
    if lb > _threshold(c) + c.slack:
        c.pruned += 1
        if d > c.max_prune_depth:
            c.max_prune_depth = d
        return
    if c.R[d] <= 0.0:
        if c.objective == 0:
            _offer(c, c.A[d], 0.0, KIND_FINITE, d, 0)
        else:
            _offer(c, c.E[d], c.A[d], KIND_FINITE, d, 0)
        return
    if d >= 1 and _repetition(c, d) and c.cut_repeats:
        c.repeat_cuts += 1
        return
    if d == c.maxdepth:
        c.open_leaves += 1
        if lb < c.leaf_min_lb:
            c.leaf_min_lb = lb
        if c.completions:
            _complete(c, d)
        return
    V = c.V + d * n
    child = c.V + (d + 1) * n
    for b in range(n):
        if d == 0 and not c.first_mask[b]:
            continue
        if c.prune_empty and V[b] == 0.0:
            continue
        saved = V[b]
        V[b] = 0.0
        esc = _move(c, V, child)
        V[b] = saved
        c.A[d + 1] = c.A[d] + c.R[d]
        c.E[d + 1] = c.E[d] + esc
        c.R[d + 1] = _total(child, n)
        _relative(c, d + 1)
        c.path[d] = b
        _visit(c, d + 1)
        if c.truncated:
            return


def dfs_search(nbr, prob, deg, escp, root, double root_cost, double root_esc, first_mask,
               int objective, int maxdepth, double bound, double tol, double eps,
               bint lookahead, bint completions, int max_period, double rep_tol,
               bint prune_empty, long long max_nodes, shared=None, int opt_cap=4096,
               bint cut_repeats=False):
    cdef int n = len(root)
    cdef int D = maxdepth + 1
    cdef int width = maxdepth if maxdepth > 0 else 1
    cdef cnp.ndarray[int, ndim=2, mode="c"] a_nbr = np.ascontiguousarray(nbr, dtype=np.intc)
    cdef cnp.ndarray[double, ndim=2, mode="c"] a_prob = np.ascontiguousarray(prob, dtype=np.float64)
    cdef cnp.ndarray[int, ndim=1, mode="c"] a_deg = np.ascontiguousarray(deg, dtype=np.intc)
    cdef cnp.ndarray[double, ndim=1, mode="c"] a_escp = np.ascontiguousarray(escp, dtype=np.float64)
    cdef cnp.ndarray[unsigned char, ndim=1, mode="c"] a_mask = np.ascontiguousarray(first_mask, dtype=np.uint8)
    cdef cnp.ndarray[double, ndim=2, mode="c"] a_V = np.zeros((D, n))
    cdef cnp.ndarray[double, ndim=2, mode="c"] a_REL = np.zeros((D, n))
    cdef cnp.ndarray[double, ndim=1, mode="c"] a_A = np.zeros(D)
    cdef cnp.ndarray[double, ndim=1, mode="c"] a_E = np.zeros(D)
    cdef cnp.ndarray[double, ndim=1, mode="c"] a_R = np.zeros(D)
    cdef cnp.ndarray[int, ndim=1, mode="c"] a_path = np.zeros(width, dtype=np.intc)
    cdef cnp.ndarray[int, ndim=1, mode="c"] a_best = np.zeros(width, dtype=np.intc)
    cdef cnp.ndarray[double, ndim=1, mode="c"] a_sv = np.zeros(n)
    cdef cnp.ndarray[double, ndim=1, mode="c"] a_sw = np.zeros(n)
    cdef cnp.ndarray[int, ndim=2, mode="c"] a_opath = np.zeros((opt_cap, width), dtype=np.intc)
    cdef cnp.ndarray[int, ndim=2, mode="c"] a_ometa = np.zeros((opt_cap, 3), dtype=np.intc)
    cdef cnp.ndarray[double, ndim=2, mode="c"] a_oval = np.zeros((opt_cap, 2))
    cdef cnp.ndarray[double, ndim=1, mode="c"] a_shared
    cdef Ctx c
    cdef int j

    if a_nbr.shape[1] != 4 or a_prob.shape[1] != 4:
        raise ValueError("neighbour tables must have 4 columns")
    c.n = n
    c.maxdepth = maxdepth
    c.objective = objective
    c.lookahead = lookahead
    c.completions = completions
    c.max_period = max_period
    c.prune_empty = prune_empty
    c.cut_repeats = cut_repeats
    c.max_nodes = max_nodes
    c.bound = bound
    c.tol = tol
    c.eps = eps
    c.slack = tol if tol > eps else eps
    c.rep_tol = rep_tol
    c.nbr = &a_nbr[0, 0]
    c.prob = &a_prob[0, 0]
    c.deg = &a_deg[0]
    c.escp = &a_escp[0]
    c.first_mask = &a_mask[0]
    c.V = &a_V[0, 0]
    c.REL = &a_REL[0, 0]
    c.A = &a_A[0]
    c.E = &a_E[0]
    c.R = &a_R[0]
    c.path = &a_path[0]
    c.sim_v = &a_sv[0]
    c.sim_w = &a_sw[0]
    c.shared = NULL
    if shared is not None:
        a_shared = shared
        c.shared = &a_shared[0]
    c.best_p1 = INFINITY
    c.best_p2 = INFINITY
    c.best_path = &a_best[0]
    c.best_kind = KIND_NONE
    c.best_len = 0
    c.best_per = 0
    c.nodes = 0
    c.pruned = 0
    c.max_prune_depth = -1
    c.open_leaves = 0
    c.leaf_min_lb = INFINITY
    c.truncated = 0
    c.repeat_cuts = 0
    c.opt_cap = opt_cap
    c.opt_count = 0
    c.opt_lost = INFINITY
    c.opt_path = &a_opath[0, 0]
    c.opt_meta = &a_ometa[0, 0]
    c.opt_val = &a_oval[0, 0]

    for j in range(n):
        a_V[0, j] = float(root[j])
    c.A[0] = root_cost
    c.E[0] = root_esc
    c.R[0] = _total(c.V, n)
    _relative(&c, 0)

    with nogil:
        _visit(&c, 0)

    optima = []
    for j in range(c.opt_count):
        d = a_ometa[j, 1]
        optima.append((tuple(int(x) for x in a_opath[j, :d]), int(a_ometa[j, 0]), int(d),
                       int(a_ometa[j, 2]), float(a_oval[j, 0]), float(a_oval[j, 1])))
    return {
        "best_p1": c.best_p1, "best_p2": c.best_p2,
        "best_path": [int(x) for x in a_best[:c.best_len]], "best_kind": c.best_kind,
        "best_len": c.best_len, "best_per": c.best_per,
        "nodes": c.nodes, "pruned": c.pruned,
        "max_prune_depth": c.max_prune_depth, "open_leaves": c.open_leaves,
        "leaf_min_lb": c.leaf_min_lb, "truncated": bool(c.truncated),
        "repeat_cuts": c.repeat_cuts,
        "optima": optima, "optima_overflow": bool(c.opt_lost <= c.best_p1 + c.eps),
    }
