"""Compare the numba kernels with the pure-numpy fallback.

Each backend runs in its own interpreter, because the backend is chosen once at
import time from ``DTPLAN_DISABLE_NUMBA``.  Two workloads are timed:

* kernel micro-benchmarks on large random arrays (``group_sum``, ``affine_eval``,
  ``water_fill``), best of several repeats after a warm-up call;
* an end-to-end ``drips_plan`` run on a bundled domain.

Usage::

    python3 benchmarks/bench_backends.py [--domain dvt-like] [--rows 200000] [--repeats 5]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from dtplan import kernels
from dtplan.domain_io import load_domain
from dtplan.planner import drips_plan

domain, rows, repeats = sys.argv[1], int(sys.argv[2]), int(sys.argv[3])
rng = np.random.default_rng(0)


def best(fn):
    fn()  # warm-up (includes JIT compilation for numba)
    times = []
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times) * 1000


n_groups = max(1, rows // 8)
inverse = rng.integers(0, n_groups, rows)
v = rng.random(rows)
lo = rng.random((rows, 4)) * 100
hi = lo + rng.random((rows, 4))
c_lo, c_hi = 1.0, 1.5
m_lo = rng.random(4)
m_hi = m_lo + 0.1
key = rng.random(rows)
p_lo = rng.random(rows) / rows
p_hi = p_lo + rng.random(rows) / rows
mass = float(0.5 * (p_hi - p_lo).sum())

out = {"backend": kernels.BACKEND}
out["group_sum_ms"] = best(lambda: kernels.group_sum(inverse, n_groups, v, v))
out["affine_eval_ms"] = best(lambda: kernels.affine_eval(lo, hi, c_lo, c_hi, m_lo, m_hi))
out["water_fill_ms"] = best(lambda: kernels.water_fill(key, p_lo, p_hi, mass))
d = load_domain(domain)
drips_plan(load_domain("tomato"), "priority")  # warm-up
t = time.perf_counter()
res = drips_plan(d, "priority")
out["drips_ms"] = (time.perf_counter() - t) * 1000
out["plans_evaluated"] = res.stats.plans_evaluated
print(json.dumps(out))
"""


def run(disable_numba: bool, domain: str, rows: int, repeats: int) -> dict:
    env = dict(os.environ)
    env["DTPLAN_DISABLE_NUMBA"] = "1" if disable_numba else "0"
    proc = subprocess.run([sys.executable, "-c", WORKER, domain, str(rows), str(repeats)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--domain", default="dvt-like")
    ap.add_argument("--rows", type=int, default=200_000)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args(argv)
    results = [run(False, args.domain, args.rows, args.repeats),
               run(True, args.domain, args.rows, args.repeats)]
    keys = ["group_sum_ms", "affine_eval_ms", "water_fill_ms", "drips_ms"]
    print(f"{'metric':<16}" + "".join(f"{r['backend']:>12}" for r in results) + f"{'ratio':>10}")
    for k in keys:
        a, b = results[0][k], results[1][k]
        print(f"{k:<16}{a:>12.2f}{b:>12.2f}{b / a if a else float('nan'):>10.2f}")
    same = results[0]["plans_evaluated"] == results[1]["plans_evaluated"]
    print(f"plans_evaluated  {results[0]['plans_evaluated']} / {results[1]['plans_evaluated']}"
          f"  ({'identical' if same else 'DIFFERENT'})")
    return 0 if same else 1


if __name__ == "__main__":
    sys.exit(main())
