"""Wall-clock comparison of the numba and numpy kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Also times one full vertex search per backend, each in a fresh interpreter so
that PRIME_LDP_DISABLE_NUMBA takes effect.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from prime_ldp import kernels
from prime_ldp.vertex_hunting import face_tables


def best_of(fn, repeat):
    fn()  # warm-up (triggers jit compilation)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases(rng):
    pts4 = np.ascontiguousarray(rng.standard_normal((5000, 3)))
    tables = face_tables(rng.standard_normal((4, 3)))
    cloud = np.ascontiguousarray(rng.standard_normal((4000, 2)))
    init = np.ascontiguousarray(cloud[:30].copy())
    labels = np.ascontiguousarray(rng.integers(0, 30, cloud.shape[0]), dtype=np.int64)
    return {
        "simplex_sq_distances (5000 pts, K=4)": (
            lambda: kernels.simplex_sq_distances_numba(pts4, *tables, kernels.FACE_TOL),
            lambda: kernels.simplex_sq_distances_numpy(pts4, *tables, kernels.FACE_TOL),
        ),
        "lloyd (4000 pts, 30 centers)": (
            lambda: kernels.lloyd_numba(cloud, init.copy(), 100),
            lambda: kernels.lloyd_numpy(cloud, init.copy(), 100),
        ),
        "cluster_medoids (4000 pts, 30 clusters)": (
            lambda: kernels.cluster_medoids_numba(cloud, labels, 30),
            lambda: kernels.cluster_medoids_numpy(cloud, labels, 30),
        ),
    }


END_TO_END = """
import time, numpy as np
from prime_ldp import sketched_vertex_search, BACKEND
rng = np.random.default_rng(0)
v = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
pts = np.vstack([rng.dirichlet(np.ones(3), 3000) @ v, np.repeat(v, 20, axis=0)])
pts += rng.normal(0, 0.01, pts.shape)
sketched_vertex_search(pts[:100], 3)
t0 = time.perf_counter()
sketched_vertex_search(pts, 3)
print(BACKEND, time.perf_counter() - t0)
"""


def end_to_end(disable):
    env = dict(os.environ, PRIME_LDP_DISABLE_NUMBA="1" if disable else "0")
    out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True,
                         text=True, check=True)
    backend, secs = out.stdout.split()
    return backend, float(secs)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(1)
    print(f"{'kernel':<42} {'numba [ms]':>11} {'numpy [ms]':>11} {'speedup':>8}")
    for name, (fast, slow) in kernel_cases(rng).items():
        t_fast = best_of(fast, args.repeat)
        t_slow = best_of(slow, args.repeat)
        print(f"{name:<42} {1e3 * t_fast:>11.2f} {1e3 * t_slow:>11.2f} {t_slow / t_fast:>7.1f}x")

    print()
    for disable in (False, True):
        backend, secs = end_to_end(disable)
        print(f"vertex search, 3060 points, backend={backend:<6} {1e3 * secs:>9.1f} ms")


if __name__ == "__main__":
    main()
