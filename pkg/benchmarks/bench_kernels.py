"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 3] [--size 128]

The first numba call per kernel is a warm-up and is excluded (compilation,
or loading from the on-disk cache).
"""

import argparse
import time

import numpy as np

from rockentropy import _kernels as K


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(size, rng):
    vol = rng.integers(0, 65536, size=(size, size, size)).astype(np.uint16)
    d = 5
    s = size // d
    nz = size // s
    points = np.sort(rng.standard_normal(20_000))
    grid = np.linspace(points[0] - 8, points[-1] + 8, 4097)
    q = rng.integers(0, 256, size=(size * 4, size * 4)).astype(np.intp)
    yield ("block_stats", lambda f: f(vol, s, d, nz, True), K.block_stats_numpy, K.block_stats_numba)
    yield ("kde_on_grid", lambda f: f(points, grid, 1.0), K.kde_on_grid_numpy, K.kde_on_grid_numba)
    yield ("cooccurrence", lambda f: f(q, 0, 1, 256), K.cooccurrence_numpy, K.cooccurrence_numba)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--size", type=int, default=128, help="edge of the cubic test volume")
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'numpy s':>10}{'numba s':>10}{'speedup':>9}  agree")
    for name, call, np_fn, nb_fn in cases(args.size, rng):
        t_np = best_of(lambda: call(np_fn), args.repeat)
        if nb_fn is None:
            print(f"{name:<14}{t_np:>10.4f}{'n/a':>10}{'':>9}  numba disabled or not installed")
            continue
        call(nb_fn)
        t_nb = best_of(lambda: call(nb_fn), args.repeat)
        agree = np.allclose(call(np_fn), call(nb_fn), rtol=1e-9, atol=1e-12)
        print(f"{name:<14}{t_np:>10.4f}{t_nb:>10.4f}{t_np / t_nb:>8.1f}x  {agree}")


if __name__ == "__main__":
    main()
