"""Time the walk step and the point-binning kernel, numba against plain numpy.

    python3 benchmarks/bench_step.py [--n 400] [--repeat 3]

The same kernels back ``qrw2d.simulate``; setting QRW2D_DISABLE_NUMBA=1 makes
the library use the numpy versions.
"""

import argparse
import time

import numpy as np

from qrw2d import _kernels
from qrw2d.model import make_B


def run_walk(kernel, u, n):
    half = n + 2
    side = 2 * half + 1
    a = np.zeros((side, side, 4), dtype=np.complex128)
    a[half, half, 0] = 1.0
    b = np.zeros_like(a)
    for k in range(n):
        kernel(a, b, u, k, half)
        a, b = b, a
    return a


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=400)
    ap.add_argument("--points", type=int, default=2_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    u = np.ascontiguousarray(make_B(0.5).coin)
    rng = np.random.default_rng(0)
    px, py = rng.uniform(-1, 1, (2, args.points))

    rows = []
    kernels = [("numpy", _kernels.step_numpy, _kernels.bin_points_numpy)]
    if _kernels.HAVE_NUMBA:
        # warm up so compile time is not counted
        run_walk(_kernels.step_numba, u, 2)
        _kernels.bin_points_numba(px[:10], py[:10], -1.0, 1.0, 8)
        kernels.append(("numba", _kernels.step_numba, _kernels.bin_points_numba))
    else:
        print("numba not available, timing numpy only")

    results = {}
    for name, step, binner in kernels:
        t_walk, field = best_of(lambda: run_walk(step, u, args.n), args.repeat)
        t_bin, counts = best_of(lambda: binner(px, py, -1.0, 1.0, 512), args.repeat)
        results[name] = (field, counts)
        rows.append((name, t_walk, t_bin))

    print(f"{'backend':8s} {'walk n=' + str(args.n):>14s} {'bin ' + str(args.points):>14s}")
    for name, t_walk, t_bin in rows:
        print(f"{name:8s} {t_walk:13.3f}s {t_bin:13.3f}s")
    if len(rows) == 2:
        (_, w0, b0), (_, w1, b1) = rows
        print(f"speedup  {w0 / w1:13.1f}x {b0 / b1:13.1f}x")
        diff = np.max(np.abs(results["numpy"][0] - results["numba"][0]))
        same = np.array_equal(results["numpy"][1], results["numba"][1])
        print(f"max amplitude difference {diff:.1e}, identical bins: {same}")


if __name__ == "__main__":
    main()
