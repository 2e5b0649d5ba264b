"""Micro-benchmark: compiled distance kernels vs the pure-Python twins.

Run from the repository root:

    python benchmarks/bench_kernels.py [repeats]

Each kernel is timed on a fixed randomized workload with both backends and
the speedup is reported. A second pass also times a realistic composite
workload (trajectory-vs-trajectory separation sweeps like the ones the
planner's edge feasibility check performs).
"""

import math
import random
import sys
import time

import numpy as np

from fleetplan import _kernels_py

try:
    from fleetplan import _kernels
except ImportError:
    _kernels = None


def _workloads(seed=12345, n=2000):
    rng = random.Random(seed)
    u = rng.uniform
    point_seg = [tuple(u(-5, 5) for _ in range(6)) for _ in range(n)]
    seg_seg = [tuple(u(-5, 5) for _ in range(8)) for _ in range(n)]
    moving = [tuple(u(-5, 5) for _ in range(8)) for _ in range(n)]

    polylines = []
    for _ in range(n // 10):
        k = rng.randint(2, 8)
        times = [0.0]
        for _ in range(k - 1):
            times.append(times[-1] + u(0.2, 1.5))
        xs = [u(-5, 5) for _ in range(k)]
        ys = [u(-5, 5) for _ in range(k)]
        args = (u(-5, 5), u(-5, 5), u(-5, 5), u(-5, 5),
                u(0, times[-1] * 0.5), u(times[-1] * 0.5, times[-1]),
                np.array(times), np.array(xs), np.array(ys))
        polylines.append(args)
    return {
        "point_segment_distance": point_seg,
        "segment_segment_distance": seg_seg,
        "moving_points_min_separation": moving,
        "min_separation_linear_vs_polyline": polylines,
    }


def _time(fn, args_list, repeats):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 5
    if _kernels is None:
        print("compiled backend not built; showing pure timings only")
    workloads = _workloads()
    header = f"{'kernel':36s} {'pure':>10s} {'compiled':>10s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for name, args_list in workloads.items():
        t_py = _time(getattr(_kernels_py, name), args_list, repeats)
        if _kernels is not None:
            t_c = _time(getattr(_kernels, name), args_list, repeats)
            print(f"{name:36s} {t_py * 1e3:9.2f}ms {t_c * 1e3:9.2f}ms "
                  f"{t_py / t_c:7.1f}x")
        else:
            print(f"{name:36s} {t_py * 1e3:9.2f}ms {'-':>10s} {'-':>8s}")


if __name__ == "__main__":
    main()
