"""Benchmark the measurement-map kernel backends.

Times the compiled extension against the numpy fallback on the workloads that
dominate production runs (record sampling and Monte Carlo jitter averaging)
and checks that both return the same values.

Run:  python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from settomo.kernels import available_backends


def make_case(n_kernel, n_points, seed=0):
    rng = np.random.default_rng(seed)
    w = rng.normal(size=(n_kernel, n_kernel)) + 1j * rng.normal(size=(n_kernel, n_kernel))
    ks = np.linspace(-6, 6, n_kernel)
    q1 = rng.uniform(-8, 8, n_points)
    q2 = rng.uniform(-8, 8, n_points)
    return w, ks, ks, q1, q2


def time_backend(fn, case, repeats=3):
    best = np.inf
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*case)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    backends = available_backends()
    print(f"backends available: {', '.join(backends)}")
    cases = [
        ("record sweep      (N=64,  4096 pts)", make_case(64, 4096)),
        ("MC jitter cell    (N=32, 10000 pts)", make_case(32, 10_000)),
        ("large record      (N=128, 4096 pts)", make_case(128, 4096)),
    ]
    for label, case in cases:
        times = {}
        results = {}
        for name, backend in backends.items():
            times[name], results[name] = time_backend(backend.map_points, case)
        line = f"{label}  " + "  ".join(
            f"{name}: {times[name] * 1e3:8.2f} ms" for name in times
        )
        if len(results) == 2:
            a, b = results.values()
            dev = np.max(np.abs(a - b)) / np.max(np.abs(a))
            fast, slow = sorted(times, key=times.get)
            line += f"  (agree to {dev:.1e}; {fast} {times[slow] / times[fast]:.1f}x faster)"
        print(line)


if __name__ == "__main__":
    main()
