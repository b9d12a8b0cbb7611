#!/usr/bin/env python3
"""Time the numba kernels against their pure-numpy counterparts.

Also times one end-to-end FALCON run under whichever backend is active; run
again with FALCONCB_DISABLE_NUMBA=1 to compare.
"""

import argparse
import time

import numpy as np

from falconcb import _kernels
from falconcb.core import enumerate_policies
from falconcb.sim import run


def best_of(fn, args, repeat):
    fn(*args)  # warm up / compile
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def cases(rng):
    n, K = 200_000, 5
    preds = rng.random((n, K))
    probs, _ = _kernels.NUMPY_KERNELS["igw_probs"](preds, 50.0)
    tables = rng.random((50, 20, K))
    m = 100_000
    xs, acts, ys = rng.integers(0, 20, m), rng.integers(0, K, m), rng.random(m)
    kernel = rng.dirichlet(np.ones(4), size=10)
    policies = enumerate_policies(10, 4)
    return {
        "igw_probs (200k x 5)": (preds, 50.0),
        "eps_greedy_probs (200k x 5)": (preds, 0.1),
        "sample_cdf (200k x 5)": (probs, rng.random(n)),
        "class_losses (|F|=50, n=100k)": (tables, xs, acts, ys),
        "product_measure (4^10 policies)": (kernel, policies),
        "policy_values (4^10 policies)": (kernel, np.full(10, 0.1), policies),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)

    print(f"active backend: {_kernels.BACKEND}")
    print(f"{'kernel':36s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for name, a in cases(rng).items():
        key = name.split()[0]
        t_jit = best_of(_kernels.JIT_KERNELS[key], a, args.repeat)
        t_np = best_of(_kernels.NUMPY_KERNELS[key], a, args.repeat)
        print(f"{name:36s} {t_jit * 1e3:10.2f} {t_np * 1e3:10.2f} {t_np / t_jit:8.2f}")

    cfg = {"horizon": 20_000, "seed": 0, "environment": {"kind": "planted"}}
    run(cfg)
    start = time.perf_counter()
    run(cfg)
    print(f"\nFALCON run, T=20000, |X|=20, K=5, |F|=50: {time.perf_counter() - start:.3f} s ({_kernels.BACKEND})")


if __name__ == "__main__":
    main()
