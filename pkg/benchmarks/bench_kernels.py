"""Time the compiled sampling kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--count N] [--repeat R]
"""

import argparse
import time

import numpy as np

from wishart_pickrell import _kernels_py

try:
    from wishart_pickrell import _kernels
except ImportError:
    _kernels = None

LAMBDAS = np.array([0.5, 0.25, 0.125])


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(count):
    for n in (2, 4, 8):
        A = np.diag(np.linspace(-1, 1, n)).astype(complex)
        yield f"trace_phases n={n}", lambda k, A=A, n=n: k.trace_phases(A, 7, 0.5, 0.1, LAMBDAS, n, 0, count)
        yield f"assemble_samples n={n}", lambda k, n=n: k.assemble_samples(7, 0.5, 0.1, LAMBDAS, n, 0, count // 10)
    yield "complex_normals", lambda k: k.complex_normals(7, 1, 0, count, 8)


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--count", type=int, default=100_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the numpy fallback is timed")
    print(f"{'kernel':<24}{'numpy [s]':>12}{'compiled [s]':>14}{'speedup':>10}")
    for name, fn in cases(args.count):
        t_py = best_of(lambda: fn(_kernels_py), args.repeat)
        if _kernels is None:
            print(f"{name:<24}{t_py:>12.4f}{'-':>14}{'-':>10}")
            continue
        t_c = best_of(lambda: fn(_kernels), args.repeat)
        print(f"{name:<24}{t_py:>12.4f}{t_c:>14.4f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
