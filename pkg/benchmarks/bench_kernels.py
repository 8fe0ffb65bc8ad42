"""Compare the numba kernels with the pure-numpy fallback.

Each backend runs in its own interpreter, since the choice is fixed at
import time by RABSPLAN_DISABLE_NUMBA.

    python benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, sys, time
import numpy as np
from rabsplan import _kernels
from rabsplan.lp import LpProblem, solve_lp
from rabsplan.oracle import exact_solve_with_stats
from rabsplan.planner import greedy_solve, make_instance
from rabsplan.scenario import build_manhattan_grid
from rabsplan.topology import build_topology, enumerate_routes
from rabsplan.traffic import TrafficModel, sample_demands

repeat = int(sys.argv[1])
grid = build_manhattan_grid()
topo = build_topology(grid)
tiny = build_manhattan_grid(150, 50)
rng = np.random.default_rng(0)
lps = [LpProblem(rng.uniform(-1, 1, 40), rng.uniform(0, 1, (60, 40)), rng.uniform(1, 2, 60))
       for _ in range(20)]


def cases():
    yield "routes H=3 (25 sites)", lambda: enumerate_routes(topo, 3)
    yield "simplex 20 LPs 60x40", lambda: [solve_lp(p) for p in lps]
    inst = make_instance(grid, sample_demands(TrafficModel(seed=1), grid), 6, 300, 3)
    yield "greedy K=300 H=3", lambda: greedy_solve(inst)
    small = make_instance(tiny, sample_demands(TrafficModel(seed=2), tiny), 2, 6, 2)
    yield "oracle 9 sites K=6", lambda: exact_solve_with_stats(small)


out = {"backend": _kernels.BACKEND, "times": {}}
for name, fn in cases():
    fn()  # warm-up (and JIT compile)
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    out["times"][name] = best
print(json.dumps(out))
"""


def run(disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("RABSPLAN_DISABLE_NUMBA", None)
    if disable:
        env["RABSPLAN_DISABLE_NUMBA"] = "1"
    res = subprocess.run([sys.executable, "-c", WORKLOAD, str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    fast = run(False, args.repeat)
    slow = run(True, args.repeat)
    print(f"{'case':<26}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>10}")
    for name, t_fast in fast["times"].items():
        t_slow = slow["times"][name]
        print(f"{name:<26}{t_fast * 1e3:>10.1f}ms{t_slow * 1e3:>10.1f}ms{t_slow / t_fast:>9.1f}x")


if __name__ == "__main__":
    main()
