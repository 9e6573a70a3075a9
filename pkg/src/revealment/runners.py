"""Evaluator objects and chunked batch drivers.

Each evaluator pairs a reference per-tape implementation (run) with a
kernel-backed batch path (batch) that must produce identical values and
identical read flags given the same coins; the test suite enforces the
parity.  Drivers handle chunking, the counter-based per-trial randomness,
and aggregation, so trial order never affects results.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import kernels
from .butterfly import ButterflyParams
from .monotone import (
    MonotoneFunctionSpec,
    evaluate_las_vegas_monotone,
    evaluate_monte_carlo_monotone,
    single_experiment_params,
    slice0_cycle_flags,
)
from .nonmonotone import evaluate_las_vegas, evaluate_monte_carlo
from .tape import EvalOutcome, InputTape, coin_rng, tape_bits

DEFAULT_MAX_ENUM = 10**9


def max_enum_guard() -> int:
    return int(os.environ.get("REVEALMENT_MAX_ENUM", DEFAULT_MAX_ENUM))


@dataclass
class TrialStats:
    """Aggregated read/value statistics over a batch of runs."""

    trials: int
    n: int
    read_counts: np.ndarray  # int64[n], distinct-position reads per bit
    nreads: np.ndarray  # int64[trials]
    values: np.ndarray  # int8[trials]

    @property
    def delta_i(self) -> np.ndarray:
        return self.read_counts / self.trials

    @property
    def mean_read_fraction(self) -> float:
        return float(self.nreads.mean() / self.n)


def _chunk_rows(trials: int, n: int) -> int:
    budget = (48 << 20) // max(n, 1)  # keep per-chunk flag matrices modest
    return max(1, min(trials, 8192, budget))


def bits_matrix(seed: int, lo: int, hi: int, n: int) -> np.ndarray:
    return np.stack([tape_bits(seed, t, n) for t in range(lo, hi)])


def input_matrix(lo: int, hi: int, n: int) -> np.ndarray:
    """Rows lo..hi-1 of the exhaustive input enumeration (bit i of the
    row index becomes position i)."""
    idx = np.arange(lo, hi, dtype=np.int64)[:, None]
    return ((idx >> np.arange(n, dtype=np.int64)[None, :]) & 1).astype(np.uint8)


class _Evaluator:
    """Common reference-loop batch; kernel classes override batch()."""

    algo = "generic"
    params: ButterflyParams

    @property
    def n(self) -> int:
        return self.params.n

    def draw_coins(self, rng: np.random.Generator) -> tuple:
        raise NotImplementedError

    def enumerate_coins(self):
        return None

    def run(self, tape: InputTape, coins: tuple) -> EvalOutcome:
        raise NotImplementedError

    def batch(self, bits, coins_list, read_counts, values, nreads) -> None:
        for i in range(bits.shape[0]):
            tape = InputTape(bits[i])
            out = self.run(tape, coins_list[i])
            values[i] = out.value
            fl = tape.log.flags
            read_counts += fl
            nreads[i] = int(fl.sum())


class NonmonotoneLasVegas(_Evaluator):
    algo = "lv"

    def __init__(self, params: ButterflyParams):
        if params.ensemble not in ("nonmonotone", "nonmonotone-symmetric"):
            raise ValueError("routing ensemble required")
        self.params = params

    def draw_coins(self, rng):
        return (int(rng.integers(self.params.W)),)

    def enumerate_coins(self):
        return [(t0,) for t0 in range(self.params.W)]

    def run(self, tape, coins):
        return evaluate_las_vegas(self.params, tape, t0=coins[0])

    def batch(self, bits, coins_list, read_counts, values, nreads):
        t0s = np.fromiter((c[0] for c in coins_list), dtype=np.int64)
        kernels.nonmono_lv_batch(
            bits,
            self.params.H,
            self.params.W,
            self.params.slots,
            t0s,
            read_counts,
            values,
            nreads,
        )


class NonmonotoneMonteCarlo(_Evaluator):
    algo = "mc"

    def __init__(self, params: ButterflyParams, m: int):
        if params.ensemble not in ("nonmonotone", "nonmonotone-symmetric"):
            raise ValueError("routing ensemble required")
        if m < 1:
            raise ValueError(f"need m >= 1, got {m}")
        self.params = params
        self.m = m

    def draw_coins(self, rng):
        t0 = int(rng.integers(self.params.W))
        starts = tuple(int(x) for x in rng.integers(self.params.H, size=self.m))
        return (t0, starts)

    def run(self, tape, coins):
        import warnings

        # the W != H regime warning is the caller's business, not the
        # driver loop's
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            return evaluate_monte_carlo(
                self.params, tape, self.m, t0=coins[0], starts=list(coins[1])
            )

    def batch(self, bits, coins_list, read_counts, values, nreads):
        t0s = np.fromiter((c[0] for c in coins_list), dtype=np.int64)
        starts = np.array([c[1] for c in coins_list], dtype=np.int64)
        kernels.nonmono_mc_batch(
            bits,
            self.params.H,
            self.params.W,
            self.params.slots,
            t0s,
            starts,
            read_counts,
            values,
            nreads,
        )


def combine_pair_masks(masks_a, masks_b, k: int) -> np.ndarray:
    """Balanced-pair output from the two experiments' slice-0 cycle masks."""
    low = np.uint64((1 << (k - 1)) - 1)
    suit = np.uint64((1 << k) - 1)
    complete = ((masks_a & low) != 0) | ((masks_b & low) != 0)
    both = ((masks_a & suit) != 0) & ((masks_b & suit) != 0)
    return np.where(complete | both, 1, -1).astype(np.int8)


class MonotoneLasVegas(_Evaluator):
    algo = "lv"

    def __init__(self, spec: MonotoneFunctionSpec):
        self.spec = spec
        self.params = spec.params

    def draw_coins(self, rng):
        W = self.params.W
        return (int(rng.integers(W)), int(rng.integers(W)))

    def enumerate_coins(self):
        W = self.params.W
        return [(a, b) for a in range(W) for b in range(W)]

    def run(self, tape, coins):
        return evaluate_las_vegas_monotone(self.spec, tape, t0s=coins)

    def batch(self, bits, coins_list, read_counts, values, nreads):
        B = bits.shape[0]
        H, W = self.params.H, self.params.W
        per = 2 * H * W
        masks = []
        nr = np.zeros(B, dtype=np.int64)
        nreads[:] = 0
        for e in range(2):
            t0s = np.fromiter((c[e] for c in coins_list), dtype=np.int64)
            me = np.zeros(B, dtype=np.uint64)
            kernels.mono_lv_values_batch(
                bits, H, W, e * per, t0s, read_counts, me, nr
            )
            masks.append(me)
            nreads += nr
        values[:] = combine_pair_masks(masks[0], masks[1], self.spec.k)


class MonotoneSingleLasVegas(_Evaluator):
    """One-experiment frontier evaluator; value = suitable cycle exists."""

    algo = "lv"

    def __init__(self, params: ButterflyParams, k: int = 1):
        if params.ensemble != "monotone":
            raise ValueError("single-experiment layout required")
        if not (1 <= k <= params.H):
            raise ValueError(f"k must lie in [1, H], got {k}")
        self.params = params
        self.k = k

    def draw_coins(self, rng):
        return (int(rng.integers(self.params.W)),)

    def enumerate_coins(self):
        return [(t0,) for t0 in range(self.params.W)]

    def run(self, tape, coins):
        flags = slice0_cycle_flags(self.params, tape, coins[0])
        value = 1 if any(flags[: self.k]) else -1
        return EvalOutcome(value=value, tape=tape, t0=coins[0])

    def batch(self, bits, coins_list, read_counts, values, nreads):
        t0s = np.fromiter((c[0] for c in coins_list), dtype=np.int64)
        masks = np.zeros(bits.shape[0], dtype=np.uint64)
        kernels.mono_lv_values_batch(
            bits, self.params.H, self.params.W, 0, t0s, read_counts, masks, nreads
        )
        suit = np.uint64((1 << self.k) - 1)
        values[:] = np.where((masks & suit) != 0, 1, -1).astype(np.int8)


class MonotoneMonteCarlo(_Evaluator):
    algo = "mc"

    def __init__(self, spec: MonotoneFunctionSpec, m: int):
        if m < 1:
            raise ValueError(f"need m >= 1, got {m}")
        self.spec = spec
        self.params = spec.params
        self.m = m

    def draw_coins(self, rng):
        HW = self.params.H * self.params.W
        p = self.m / self.params.H
        sets = []
        for _ in range(2):
            keep = rng.random(HW) < p
            sets.append(tuple(int(i) for i in np.flatnonzero(keep)))
        return tuple(sets)

    def run(self, tape, coins):
        return evaluate_monte_carlo_monotone(
            self.spec, tape, self.m, seed_sets=(list(coins[0]), list(coins[1]))
        )

    def batch(self, bits, coins_list, read_counts, values, nreads):
        B = bits.shape[0]
        H, W = self.params.H, self.params.W
        HW = H * W
        per = 2 * HW
        masks = []
        nr = np.zeros(B, dtype=np.int64)
        nreads[:] = 0
        for e in range(2):
            seed_masks = np.zeros((B, HW), dtype=np.uint8)
            for i, c in enumerate(coins_list):
                idx = np.asarray(c[e], dtype=np.int64)
                if idx.size:
                    seed_masks[i, idx] = 1
            me = np.zeros(B, dtype=np.uint64)
            kernels.mono_mc_batch(
                bits, H, W, e * per, seed_masks, read_counts, me, nr, True
            )
            masks.append(me)
            nreads += nr
        values[:] = combine_pair_masks(masks[0], masks[1], self.spec.k)


def run_trials(evaluator, trials: int, seed: int = 0) -> TrialStats:
    """Fresh uniform tapes, per-trial coin streams, aggregated stats."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = evaluator.n
    read_counts = np.zeros(n, dtype=np.int64)
    nreads = np.zeros(trials, dtype=np.int64)
    values = np.zeros(trials, dtype=np.int8)
    step = _chunk_rows(trials, n)
    for lo in range(0, trials, step):
        hi = min(lo + step, trials)
        bits = bits_matrix(seed, lo, hi, n)
        coins = [evaluator.draw_coins(coin_rng(seed, t)) for t in range(lo, hi)]
        evaluator.batch(bits, coins, read_counts, values[lo:hi], nreads[lo:hi])
    return TrialStats(
        trials=trials, n=n, read_counts=read_counts, nreads=nreads, values=values
    )


@dataclass
class EnumerationStats:
    """Exact statistics over every (input, coin) pair."""

    n: int
    coins: list
    total: int  # 2^n * len(coins)
    read_counts: np.ndarray  # int64[n]
    values: np.ndarray  # int8[(len(coins), 2^n)]

    @property
    def delta_i(self) -> np.ndarray:
        return self.read_counts / self.total


def run_enumeration(evaluator, max_enum: int | None = None) -> EnumerationStats:
    """Run every input against every internal-coin assignment.

    Only meaningful for evaluators with finitely enumerable randomness
    (the frontier evaluators: start slices only).
    """
    coins = evaluator.enumerate_coins()
    if coins is None:
        raise ValueError("evaluator randomness is not finitely enumerable")
    n = evaluator.n
    if max_enum is None:
        max_enum = max_enum_guard()
    total = (1 << n) * len(coins)
    if total > max_enum:
        raise ValueError(
            f"enumeration size {total} exceeds guard {max_enum}; "
            "set REVEALMENT_MAX_ENUM to override"
        )
    read_counts = np.zeros(n, dtype=np.int64)
    values = np.zeros((len(coins), 1 << n), dtype=np.int8)
    nr = np.zeros(min(1 << n, 65536), dtype=np.int64)
    step = _chunk_rows(1 << n, n)
    for ci, c in enumerate(coins):
        for lo in range(0, 1 << n, step):
            hi = min(lo + step, 1 << n)
            bits = input_matrix(lo, hi, n)
            evaluator.batch(
                bits, [c] * (hi - lo), read_counts, values[ci, lo:hi], nr[: hi - lo]
            )
    return EnumerationStats(
        n=n, coins=coins, total=total, read_counts=read_counts, values=values
    )


def winding_counts(H: int, W: int, trials: int, seed: int = 0) -> np.ndarray:
    """Exact winding-cycle count of `trials` uniform edge-bit inputs."""
    n = 2 * H * W
    counts = np.zeros(trials, dtype=np.int64)
    step = max(1, min(trials, (32 << 20) // (H * H * 8)))
    for lo in range(0, trials, step):
        hi = min(lo + step, trials)
        bits = bits_matrix(seed, lo, hi, n)
        kernels.winding_count_batch(bits, H, W, 0, counts[lo:hi])
    return counts


def slice0_flag_samples(params: ButterflyParams, trials: int, seed: int = 0):
    """(trials, H) booleans: slice-0 vertex j on a winding cycle, single
    experiment, one uniform input per row."""
    single = single_experiment_params(params)
    H, W = single.H, single.W
    n = single.n
    read_counts = np.zeros(n, dtype=np.int64)
    out = np.zeros((trials, H), dtype=bool)
    step = _chunk_rows(trials, n)
    jbit = np.uint64(1) << np.arange(H, dtype=np.uint64)
    for lo in range(0, trials, step):
        hi = min(lo + step, trials)
        bits = bits_matrix(seed, lo, hi, n)
        masks = np.zeros(hi - lo, dtype=np.uint64)
        nr = np.zeros(hi - lo, dtype=np.int64)
        t0s = np.zeros(hi - lo, dtype=np.int64)
        kernels.mono_lv_values_batch(bits, H, W, 0, t0s, read_counts, masks, nr)
        out[lo:hi] = (masks[:, None] & jbit[None, :]) != 0
    return out


def truth_values(evaluator, coins: tuple) -> np.ndarray:
    """The function table: evaluator output on every input, fixed coins."""
    n = evaluator.n
    if (1 << n) > max_enum_guard():
        raise ValueError(f"truth table of 2^{n} inputs exceeds enumeration guard")
    values = np.zeros(1 << n, dtype=np.int8)
    read_counts = np.zeros(n, dtype=np.int64)
    step = _chunk_rows(1 << n, n)
    nr = np.zeros(step, dtype=np.int64)
    for lo in range(0, 1 << n, step):
        hi = min(lo + step, 1 << n)
        bits = input_matrix(lo, hi, n)
        evaluator.batch(bits, [coins] * (hi - lo), read_counts, values[lo:hi], nr[: hi - lo])
    return values


@dataclass
class ErrorExperiment:
    """A Monte Carlo evaluator scored against the zero-error one."""

    mc: TrialStats
    lv: TrialStats
    error_rate: float
    error_se: float


def error_experiment(mc_evaluator, lv_evaluator, trials: int, seed: int = 0):
    """Run both evaluators on the same tapes with independent coins."""
    if mc_evaluator.n != lv_evaluator.n:
        raise ValueError("evaluators must share the input layout")
    n = mc_evaluator.n
    rc_mc = np.zeros(n, dtype=np.int64)
    rc_lv = np.zeros(n, dtype=np.int64)
    nr_mc = np.zeros(trials, dtype=np.int64)
    nr_lv = np.zeros(trials, dtype=np.int64)
    v_mc = np.zeros(trials, dtype=np.int8)
    v_lv = np.zeros(trials, dtype=np.int8)
    step = _chunk_rows(trials, n)
    for lo in range(0, trials, step):
        hi = min(lo + step, trials)
        bits = bits_matrix(seed, lo, hi, n)
        coins_mc = [mc_evaluator.draw_coins(coin_rng(seed, t)) for t in range(lo, hi)]
        coins_lv = [
            lv_evaluator.draw_coins(coin_rng(seed, t, alt=True)) for t in range(lo, hi)
        ]
        mc_evaluator.batch(bits, coins_mc, rc_mc, v_mc[lo:hi], nr_mc[lo:hi])
        lv_evaluator.batch(bits, coins_lv, rc_lv, v_lv[lo:hi], nr_lv[lo:hi])
    err = float((v_mc != v_lv).mean())
    return ErrorExperiment(
        mc=TrialStats(trials, n, rc_mc, nr_mc, v_mc),
        lv=TrialStats(trials, n, rc_lv, nr_lv, v_lv),
        error_rate=err,
        error_se=float(np.sqrt(max(err * (1 - err), 1e-12) / trials)),
    )


def monotonicity_sample(spec: MonotoneFunctionSpec, samples: int, seed: int = 0) -> int:
    """Number of sampled single-bit 0->1 flips that lower the pair function.

    Draws (input, position) pairs, forces the position to 0 and to 1, and
    compares the direct function values; returns the violation count.
    """
    lv = MonotoneLasVegas(spec)
    n = spec.params.n
    rc = np.zeros(n, dtype=np.int64)
    violations = 0
    step = _chunk_rows(samples, n)
    for lo in range(0, samples, step):
        hi = min(lo + step, samples)
        rows = hi - lo
        bits = bits_matrix(seed, lo, hi, n)
        pos = np.fromiter(
            (int(coin_rng(seed, t, alt=True).integers(n)) for t in range(lo, hi)),
            dtype=np.int64,
        )
        r = np.arange(rows)
        lo_vals = np.zeros(rows, dtype=np.int8)
        hi_vals = np.zeros(rows, dtype=np.int8)
        nr = np.zeros(rows, dtype=np.int64)
        coins = [(0, 0)] * rows
        bits[r, pos] = 0
        lv.batch(bits, coins, rc, lo_vals, nr)
        bits[r, pos] = 1
        lv.batch(bits, coins, rc, hi_vals, nr)
        violations += int((hi_vals < lo_vals).sum())
    return violations


def lv_read_stats(params: ButterflyParams, trials: int, seed: int = 0) -> TrialStats:
    """Read statistics of the frontier evaluator at any H (values skipped
    for the edge ensembles, where origin masks would cap H at 64)."""
    if params.ensemble in ("nonmonotone", "nonmonotone-symmetric"):
        return run_trials(NonmonotoneLasVegas(params), trials, seed)
    n = params.n
    H, W = params.H, params.W
    per = 2 * H * W
    read_counts = np.zeros(n, dtype=np.int64)
    nreads = np.zeros(trials, dtype=np.int64)
    step = _chunk_rows(trials, n)
    nr = np.zeros(step, dtype=np.int64)
    for lo in range(0, trials, step):
        hi = min(lo + step, trials)
        bits = bits_matrix(seed, lo, hi, n)
        rows = hi - lo
        coins = []
        for t in range(lo, hi):
            rng = coin_rng(seed, t)
            coins.append(tuple(int(rng.integers(W)) for _ in range(params.experiments)))
        for e in range(params.experiments):
            t0s = np.fromiter((c[e] for c in coins), dtype=np.int64)
            kernels.mono_lv_reads_batch(
                bits, H, W, e * per, t0s, read_counts, nr[:rows]
            )
            nreads[lo:hi] += nr[:rows]
    return TrialStats(
        trials=trials,
        n=n,
        read_counts=read_counts,
        nreads=nreads,
        values=np.zeros(trials, dtype=np.int8),
    )
