"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py --n 20000 --r 100 --repeat 5

Each kernel runs once untimed (JIT compilation), then the best of
``--repeat`` calls is reported.  An end-to-end KCC fuse is timed under both
backends as well.
"""
import argparse
import time

import numpy as np

from consclust import BasicPartitionSet, kcc_fuse
from consclust._accel import HAS_NUMBA, use_backend
from consclust.core import encode_binary
from consclust.kernels import KERNELS


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads(n, r, K, hac_n, rng):
    ks = rng.integers(2, 12, size=r)
    labels = np.column_stack([rng.integers(0, k, size=n) for k in ks])
    coding = encode_binary(BasicPartitionSet(labels, tuple(int(k) for k in ks)))
    cols = np.ascontiguousarray(coding.cols)
    table = rng.random((K, coding.d))
    assign = rng.integers(0, K, size=n)
    X = rng.normal(size=(n, 16))
    C = rng.normal(size=(K, 16))
    w = rng.random(n) + 0.5
    small = np.ascontiguousarray(labels[:hac_n])
    S = (small[:, None, :] == small[None, :, :]).sum(axis=2).astype(np.float64)
    return {
        "block_gather": (cols, table, np.ones(r)),
        "block_counts": (cols, assign, K, coding.d),
        "sq_dists": (X, C),
        "weighted_sums": (X, w, assign, K),
        "coassoc": (small,),
        "agglomerate": (S, K, False),
    }, BasicPartitionSet(labels, tuple(int(k) for k in ks))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000, help="points for the linear-time kernels")
    ap.add_argument("--r", type=int, default=100, help="basic partitions")
    ap.add_argument("--k", type=int, default=8, help="clusters")
    ap.add_argument("--hac-n", type=int, default=1500, help="points for the quadratic kernels")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not HAS_NUMBA:
        ap.error("numba is not installed; nothing to compare")

    work, bps = workloads(args.n, args.r, args.k, args.hac_n, np.random.default_rng(args.seed))
    print(f"{'kernel':<14} {'numba [s]':>10} {'numpy [s]':>10} {'speedup':>8}")
    for name, (fast, slow) in KERNELS.items():
        a = work[name]
        t_fast = best_of(lambda: fast(*a), args.repeat)
        t_slow = best_of(lambda: slow(*a), args.repeat)
        print(f"{name:<14} {t_fast:>10.4f} {t_slow:>10.4f} {t_slow / t_fast:>7.1f}x")

    fuse = {}
    for backend in ("numba", "numpy"):
        with use_backend(backend):
            fuse[backend] = best_of(lambda: kcc_fuse(bps, args.k, "uc", seed=0, restarts=3), max(1, args.repeat // 2))
    print(f"{'kcc_fuse uc':<14} {fuse['numba']:>10.4f} {fuse['numpy']:>10.4f} {fuse['numpy'] / fuse['numba']:>7.1f}x")


if __name__ == "__main__":
    main()
