"""Compare the compiled kernel backend against the pure-NumPy fallback.

The backend is chosen at import time, so each timing runs in a fresh
subprocess with DEGPOT_BACKEND set accordingly.

Usage: python3 benchmarks/bench_backends.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, os, sys, time
import numpy as np

from degpot import backend, bie
from degpot.coeff import TimeCoefficient
from degpot.geometry import Circle

def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best

repeat = int(sys.argv[1])
rng = np.random.default_rng(0)
m, npanel, npts = 128, 24, 400
d2 = rng.random((npts, m)) + 0.05
ratio = rng.normal(size=(npts, m))
w = rng.random(m)
z = np.sort(rng.random(npanel + 1)) * 0.4
dens = rng.normal(size=(m, npanel))

results = {"backend": backend.BACKEND_NAME}
results["dlayer_sum"] = timeit(
    lambda: backend.dlayer_sum(2, d2, ratio, w, z, dens), repeat)
results["slayer_sum"] = timeit(
    lambda: backend.slayer_sum(2, d2, w, z, dens), repeat)
results["dlayer_panels"] = timeit(
    lambda: backend.dlayer_panels(2, d2, ratio, w, z), repeat)
results["slayer_panels"] = timeit(
    lambda: backend.slayer_panels(2, d2, w, z), repeat)

geo = Circle((0.0, 0.0), 1.0)
coeff = TimeCoefficient.constant(1.0, 0.5)
g = lambda th, t: np.asarray(t) * np.cos(th)
results["ibvp_solve_64x32"] = timeit(
    lambda: bie.solve_ibvp(geo, coeff, g, m_space=64, m_time=32), repeat)
print(json.dumps(results))
"""


def run(backend_name, repeat):
    env = dict(os.environ, DEGPOT_BACKEND=backend_name)
    out = subprocess.run([sys.executable, "-c", WORKER, str(repeat)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3,
                    help="repetitions per measurement (best is kept)")
    args = ap.parse_args()

    rows = [run(name, args.repeat) for name in ("cython", "numpy")]
    if rows[0]["backend"] == rows[1]["backend"]:
        print("warning: compiled backend unavailable; both runs used "
              f"'{rows[0]['backend']}'", file=sys.stderr)

    keys = [k for k in rows[0] if k != "backend"]
    width = max(len(k) for k in keys)
    print(f"{'kernel':<{width}}  {rows[0]['backend']:>12}  "
          f"{rows[1]['backend']:>12}  speedup")
    for k in keys:
        a, b = rows[0][k], rows[1][k]
        print(f"{k:<{width}}  {a * 1e3:>10.3f}ms  {b * 1e3:>10.3f}ms  "
              f"{b / a:>6.2f}x")


if __name__ == "__main__":
    main()
