"""Benchmark the numba kernels against their pure-NumPy fallbacks.

Run: python benchmarks/bench_kernels.py [--repeats N]

The package selects one flavour at import time (LSCD_DISABLE_NUMBA=1 forces
the NumPy path); this script ignores that switch and times both flavours on
identical inputs.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from lscd import _kernels as k
from lscd._accel import NUMBA_ENABLED


def bench(fn, *args, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def make_cases(rng):
    a = rng.normal(size=(300, 768)) + 1.0
    b = rng.normal(size=(250, 768)) + 1.0

    x = np.vstack(
        [rng.normal([5, 0, 0, 0], 0.2, (100, 4)), rng.normal([0, 5, 0, 0], 0.2, (100, 4))]
    )
    norms = np.linalg.norm(x, axis=1)
    s = np.clip((x @ x.T) / np.outer(norms, norms), -1, 1)
    off = s[~np.eye(s.shape[0], dtype=bool)]
    s[np.diag_indices(s.shape[0])] = np.median(off)

    n = 80
    ei, ej, w = [], [], []
    for i in range(n):
        for j in range(i + 1, n):
            ei.append(i)
            ej.append(j)
            w.append(rng.uniform(1, 4))
    ei = np.array(ei, dtype=np.int64)
    ej = np.array(ej, dtype=np.int64)
    w = np.array(w)
    cw = np.maximum(0.0, 2.5 - w)
    ca = np.maximum(0.0, w - 2.5)
    degree = np.bincount(ei, minlength=n) + np.bincount(ej, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(degree)
    indices = np.zeros(int(indptr[-1]), dtype=np.int64)
    scw = np.zeros(int(indptr[-1]))
    sca = np.zeros(int(indptr[-1]))
    cursor = indptr[:-1].copy()
    for t in range(ei.size):
        for u, v in ((ei[t], ej[t]), (ej[t], ei[t])):
            slot = cursor[u]
            indices[slot] = v
            scw[slot] = cw[t]
            sca[slot] = ca[t]
            cursor[u] += 1

    nb = 11
    bei, bej = [], []
    bw = []
    for i in range(nb):
        for j in range(i + 1, nb):
            bei.append(i)
            bej.append(j)
            bw.append(rng.uniform(1, 4))
    bei = np.array(bei, dtype=np.int64)
    bej = np.array(bej, dtype=np.int64)
    bw = np.array(bw)
    bcw = np.maximum(0.0, 2.5 - bw)
    bca = np.maximum(0.0, bw - 2.5)

    return {
        "cosine 300x250x768": (k._cosine_matrix_nb, k._cosine_matrix_np, (a, b)),
        "canberra 300x250x768": (k._canberra_matrix_nb, k._canberra_matrix_np, (a, b)),
        "ap messages n=200": (
            k._ap_messages_nb,
            k._ap_messages_np,
            (s, 0.5, 200, 15),
        ),
        "greedy descent n=80": (
            lambda *args: k._greedy_descent_nb(np.arange(n, dtype=np.int64), *args),
            lambda *args: k._greedy_descent_np(np.arange(n, dtype=np.int64), *args),
            (indptr, indices, scw, sca, 10_000),
        ),
        "brute force n=11": (
            k._brute_force_rgs_nb,
            k._brute_force_rgs_np,
            (nb, bei, bej, bcw, bca),
        ),
    }


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if not NUMBA_ENABLED:
        print("numba is not active in this environment; nothing to compare")
        return 1

    rng = np.random.default_rng(0)
    cases = make_cases(rng)

    print("compiling numba kernels (excluded from timings)...")
    for name, (fn_nb, _, call_args) in cases.items():
        fn_nb(*call_args)

    header = f"{'kernel':<24} {'numba':>10} {'numpy':>10} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, (fn_nb, fn_np, call_args) in cases.items():
        t_nb = bench(fn_nb, *call_args, repeats=args.repeats)
        t_np = bench(fn_np, *call_args, repeats=args.repeats)
        print(f"{name:<24} {t_nb * 1e3:>8.2f}ms {t_np * 1e3:>8.2f}ms {t_np / t_nb:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
