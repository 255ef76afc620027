"""Benchmark the compiled Gaussian-stream core against the pure-numpy
fallback.

Run:  python benchmarks/bench_backends.py

Both backends produce bit-identical streams; the comparison is purely
about throughput, on raw variate generation and on an end-to-end
small-ball estimate (where the matrix assembly is shared BLAS work, so
the speedup dilutes).
"""

import time

import numpy as np

import gprior as gp
from gprior import _rng_py
from gprior import backend

try:
    from gprior import _rng_cy
except ImportError:
    _rng_cy = None


def timeit(fn, repeat=5):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_generation(impl, count, dim):
    return timeit(lambda: impl.standard_normals(42, 0, count, dim))


def bench_smallball(impl, basis, trials):
    old = backend.standard_normals
    backend.standard_normals = impl.standard_normals
    try:
        return timeit(
            lambda: gp.smallball_mc(basis, 0.5, "l2", None, trials, 3), repeat=3
        )
    finally:
        backend.standard_normals = old


def main():
    impls = [("pure-numpy", _rng_py)]
    if _rng_cy is not None:
        impls.append(("compiled", _rng_cy))
    else:
        print("compiled backend not built; showing fallback only")

    print(f"{'case':<34}" + "".join(f"{name:>14}" for name, _ in impls)
          + ("      speedup" if len(impls) == 2 else ""))

    shapes = [(100_000, 50), (50_000, 200), (10_000, 2000)]
    for count, dim in shapes:
        times = [bench_generation(impl, count, dim) for _, impl in impls]
        rate = count * dim / times[-1] / 1e6
        row = f"normals {count}x{dim:<5}  ({rate:7.1f} M/s)"
        print(f"{row:<34}" + "".join(f"{t * 1e3:>11.1f} ms" for t in times)
              + (f"{times[0] / times[1]:>11.2f}x" if len(times) == 2 else ""))

    basis = gp.eig_basis(gp.BrownianMotion(), gp.make_grid(201), 1e-10)
    times = [bench_smallball(impl, basis, 100_000) for _, impl in impls]
    row = "smallball 1e5 trials, n=201"
    print(f"{row:<34}" + "".join(f"{t * 1e3:>11.1f} ms" for t in times)
          + (f"{times[0] / times[1]:>11.2f}x" if len(times) == 2 else ""))

    a = _rng_py.standard_normals(7, 0, 1000, 64)
    if _rng_cy is not None:
        b = _rng_cy.standard_normals(7, 0, 1000, 64)
        print("\nstreams bit-identical:", np.array_equal(a, b))


if __name__ == "__main__":
    main()
