#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Runs each batch kernel on a representative workload with both backends
and prints per-trial times plus the speedup.  Output values are also
cross-checked so a fast-but-wrong backend cannot slip through.

Usage: python benchmarks/bench_kernels.py [--trials N]
"""

import argparse
import time

import numpy as np

from revealment import kernels
from revealment.tape import tape_bits


def _bits(seed, trials, n):
    return np.stack([tape_bits(seed, t, n) for t in range(trials)])


def bench_case(build, trials):
    """build(backend, trials) -> (runner, checksum); times both backends."""
    results = {}
    for backend_name in ("python", "compiled"):
        try:
            backend = kernels.get_backend(backend_name)
        except ImportError:
            results[backend_name] = None
            continue

        run, checksum = build(backend, trials)
        run()  # warm-up and allocation
        t0 = time.perf_counter()
        run()
        dt = time.perf_counter() - t0
        results[backend_name] = (dt / trials, checksum())
    return results


def case_nonmono_lv(H, W, trials):
    n = H * W
    bits = _bits(1, trials, n)
    t0s = np.arange(trials, dtype=np.int64) % W

    def build(backend, trials):
        rc = np.zeros(n, dtype=np.int64)
        vals = np.zeros(trials, dtype=np.int8)
        nr = np.zeros(trials, dtype=np.int64)

        def run():
            rc[:] = 0
            backend.nonmono_lv_batch(bits, H, W, 1, t0s, rc, vals, nr)

        return run, lambda: (int(rc.sum()), int(vals.astype(np.int64).sum()))

    return build


def case_nonmono_mc(H, W, m, trials):
    n = H * W
    bits = _bits(2, trials, n)
    t0s = np.arange(trials, dtype=np.int64) % W
    starts = np.tile(np.arange(m, dtype=np.int64) * (H // m), (trials, 1))

    def build(backend, trials):
        rc = np.zeros(n, dtype=np.int64)
        vals = np.zeros(trials, dtype=np.int8)
        nr = np.zeros(trials, dtype=np.int64)

        def run():
            rc[:] = 0
            backend.nonmono_mc_batch(bits, H, W, 1, t0s, starts, rc, vals, nr)

        return run, lambda: (int(rc.sum()), int(vals.astype(np.int64).sum()))

    return build


def case_mono_lv_values(H, W, trials):
    n = 2 * H * W
    bits = _bits(3, trials, n)
    t0s = np.arange(trials, dtype=np.int64) % W

    def build(backend, trials):
        rc = np.zeros(n, dtype=np.int64)
        masks = np.zeros(trials, dtype=np.uint64)
        nr = np.zeros(trials, dtype=np.int64)

        def run():
            rc[:] = 0
            backend.mono_lv_values_batch(bits, H, W, 0, t0s, rc, masks, nr)

        return run, lambda: (int(rc.sum()), int(masks.sum() % (1 << 62)))

    return build


def case_mono_mc(H, W, m, trials):
    n = 2 * H * W
    bits = _bits(4, trials, n)
    rng = np.random.default_rng(5)
    seed_masks = (rng.random((trials, H * W)) < m / H).astype(np.uint8)

    def build(backend, trials):
        rc = np.zeros(n, dtype=np.int64)
        masks = np.zeros(trials, dtype=np.uint64)
        nr = np.zeros(trials, dtype=np.int64)

        def run():
            rc[:] = 0
            backend.mono_mc_batch(bits, H, W, 0, seed_masks, rc, masks, nr, True)

        return run, lambda: (int(rc.sum()), int(masks.sum() % (1 << 62)))

    return build


def case_winding(H, W, trials):
    n = 2 * H * W
    bits = _bits(6, trials, n)

    def build(backend, trials):
        counts = np.zeros(trials, dtype=np.int64)

        def run():
            backend.winding_count_batch(bits, H, W, 0, counts)

        return run, lambda: int(counts.sum())

    return build


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--trials", type=int, default=2000)
    args = parser.parse_args()
    trials = args.trials

    few, some = max(trials // 20, 10), max(trials // 4, 10)
    cases = [
        ("routing frontier  H=128 W=896", case_nonmono_lv(128, 896, few), few),
        ("routing frontier  H=16  W=16", case_nonmono_lv(16, 16, trials), trials),
        ("routing sparse    H=16  W=16 m=4", case_nonmono_mc(16, 16, 4, trials), trials),
        ("edge frontier     H=64  W=12", case_mono_lv_values(64, 12, trials), trials),
        ("edge sparse       H=64  W=12 m=4", case_mono_mc(64, 12, 4, some), some),
        ("cycle counting    H=64  W=12", case_winding(64, 12, some), some),
    ]

    print(f"{'case':36s} {'python/trial':>14s} {'compiled/trial':>15s} {'speedup':>8s}")
    for label, build, case_trials in cases:
        results = bench_case(build, case_trials)
        py = results["python"]
        comp = results.get("compiled")
        if comp is None:
            print(f"{label:36s} {py[0] * 1e6:12.1f}us {'(not built)':>15s}")
            continue
        assert py[1] == comp[1], f"backend outputs differ for {label}"
        print(
            f"{label:36s} {py[0] * 1e6:12.1f}us {comp[0] * 1e6:13.1f}us "
            f"{py[0] / comp[0]:7.1f}x"
        )


if __name__ == "__main__":
    main()
