"""Time the compiled search kernel against the pure-Python fallback.

    python benchmarks/bench_kernel.py [--repeat N]

Both backends must report the same node count and value; the script exits
non-zero if they disagree.
"""
from __future__ import annotations

import argparse
import sys
import time

from catbox import kernels
from catbox.search import SearchConfig, search_optimal
from catbox.topology import parse_topology

CASES = [("line:5", 8), ("line:6", 10), ("ring:5", 8), ("line:5:exits", 10), ("grid:2x3", 8)]


def run(top: str, depth: int, backend: str, repeat: int):
    kernels.use_backend(backend)
    t = parse_topology(top)
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = search_optimal(t, SearchConfig(maxdepth=depth))
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = kernels.available()
    if "cython" not in backends:
        print("compiled kernel not built; only the fallback is available", file=sys.stderr)
    prev, bad = kernels.backend_name(), 0
    print(f"{'case':<18} {'depth':>5} {'nodes':>10} " + " ".join(f"{b + ' s':>12}" for b in backends)
          + ("   speedup" if len(backends) > 1 else ""))
    try:
        for top, depth in CASES:
            res = {b: run(top, depth, b, args.repeat) for b in backends}
            outs = [o for _, o in res.values()]
            if len({(o.nodes, o.value) for o in outs}) != 1:
                bad += 1
            line = f"{top:<18} {depth:>5} {outs[0].nodes:>10} " + " ".join(
                f"{res[b][0]:>12.4f}" for b in backends)
            if len(backends) > 1:
                line += f"   {res['python'][0] / res['cython'][0]:>7.1f}x"
            print(line + ("  MISMATCH" if len({(o.nodes, o.value) for o in outs}) != 1 else ""))
    finally:
        kernels.use_backend(prev)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
