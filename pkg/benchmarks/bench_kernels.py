#!/usr/bin/env python3
"""Time the compiled kernels against the pure-numpy fallback.

Runs the Walsh-Hadamard and Coifman-butterfly kernels plus one end-to-end
sensing round trip through both backends and prints a small table.  The
compiled extension is exercised only if it actually built; otherwise the
script says so and times the fallback alone.

Usage:
    python3 benchmarks/bench_kernels.py [--size 65536] [--repeat 5]
"""

import argparse
import time

import numpy as np

from dirframes import backend
from dirframes import _kernels_py


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=65536, help="transform length (power of two)")
    parser.add_argument("--repeat", type=int, default=5, help="best-of repetitions")
    args = parser.parse_args(argv)

    n, repeat = args.size, args.repeat
    if n & (n - 1) or n <= 0:
        parser.error("--size must be a power of two")

    impls = [("python", _kernels_py)]
    if backend.HAVE_COMPILED:
        from dirframes import _kernels

        impls.append(("compiled", _kernels))
    else:
        print("compiled extension not available; timing the numpy fallback only")

    rng = np.random.Generator(np.random.Philox(key=[0, 0xBE7C]))
    x = rng.standard_normal(n)
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)

    rows = []
    for name, impl in impls:
        t_fwht = _best_of(lambda: backend.fwht(x, impl=impl), repeat)
        t_noi = _best_of(lambda: backend.noiselet(z, impl=impl), repeat)
        t_adj = _best_of(lambda: backend.noiselet_adjoint(z, impl=impl), repeat)
        rows.append((name, t_fwht, t_noi, t_adj))

    # agreement check between the two paths when both exist
    if len(impls) == 2:
        a = backend.fwht(x, impl=impls[0][1])
        b = backend.fwht(x, impl=impls[1][1])
        c = backend.noiselet(z, impl=impls[0][1])
        d = backend.noiselet(z, impl=impls[1][1])
        agree = max(np.max(np.abs(a - b)) / np.max(np.abs(a)), np.max(np.abs(c - d)) / np.max(np.abs(c)))
        print(f"path agreement (rel max): {agree:.3e}")

    header = f"{'backend':>9} | {'fwht':>10} | {'noiselet':>10} | {'adjoint':>10}"
    print(f"n = {n}, best of {repeat}")
    print(header)
    print("-" * len(header))
    for name, t1, t2, t3 in rows:
        print(f"{name:>9} | {t1 * 1e3:8.3f}ms | {t2 * 1e3:8.3f}ms | {t3 * 1e3:8.3f}ms")
    if len(rows) == 2:
        p, c = rows[0], rows[1]
        print(
            f"{'speedup':>9} | {p[1] / c[1]:9.2f}x | {p[2] / c[2]:9.2f}x | {p[3] / c[3]:9.2f}x"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
