"""Measurement and verification layer.

Estimates (or exactly enumerates) per-bit read probabilities, computes
truth tables, low-level Fourier coefficients and influences, and checks
the balance, lower-bound, and correlation inequalities that connect read
probabilities to function structure.  The +-1 output convention is used
throughout, so Var(f) = 1 - E[f]^2 for Boolean f.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import runners
from .runners import EnumerationStats
from .tape import InputTape, alt_tape_bits, coin_rng, tape_bits


@dataclass
class RevealmentReport:
    """Per-bit read frequencies of one evaluator."""

    n: int
    trials: int  # runs in statistical mode, (inputs x coins) in exact mode
    mode: str  # "statistical" or "exact"
    delta_i: np.ndarray
    se_i: np.ndarray
    read_counts: np.ndarray
    enumeration: Optional[EnumerationStats] = None

    @property
    def delta_max(self) -> float:
        return float(self.delta_i.max())

    @property
    def delta_max_se(self) -> float:
        return float(self.se_i[int(np.argmax(self.delta_i))])

    @property
    def mean_read_fraction(self) -> float:
        return float(self.read_counts.sum() / (self.trials * self.n))

    def delta_max_fraction(self) -> Fraction:
        """Exact rational delta; exact mode only."""
        if self.mode != "exact":
            raise ValueError("rational delta requires exact mode")
        return Fraction(int(self.read_counts.max()), self.trials)

    def csv_rows(self):
        for i in range(self.n):
            yield i, float(self.delta_i[i]), float(self.se_i[i])


def estimate_revealment(evaluator, trials: int, seed: int = 0) -> RevealmentReport:
    """Empirical read frequencies over fresh uniform tapes."""
    stats = runners.run_trials(evaluator, trials, seed)
    delta = stats.read_counts / trials
    se = np.sqrt(delta * (1.0 - delta) / trials)
    return RevealmentReport(
        n=stats.n,
        trials=trials,
        mode="statistical",
        delta_i=delta,
        se_i=se,
        read_counts=stats.read_counts,
    )


def exact_revealment(evaluator, max_enum: Optional[int] = None) -> RevealmentReport:
    """Exact read probabilities over every (input, internal choice) pair."""
    en = runners.run_enumeration(evaluator, max_enum)
    delta = en.read_counts / en.total
    return RevealmentReport(
        n=en.n,
        trials=en.total,
        mode="exact",
        delta_i=delta,
        se_i=np.zeros(en.n),
        read_counts=en.read_counts,
        enumeration=en,
    )


# ---------------------------------------------------------------------------
# truth tables and Fourier structure

TABLE_SIZE_LIMIT = 24


@dataclass
class TruthTable:
    n: int
    values: np.ndarray  # int8, 2^n entries in {-1, +1}

    def __post_init__(self):
        if self.n > TABLE_SIZE_LIMIT:
            raise ValueError(f"truth tables guarded at n <= {TABLE_SIZE_LIMIT}")
        if self.values.shape != (1 << self.n,):
            raise ValueError("truth table must have exactly 2^n entries")
        if not np.isin(self.values, (-1, 1)).all():
            raise ValueError("truth table values must be -1 or +1")

    @property
    def ones(self) -> int:
        return int((self.values == 1).sum())

    def mean_fraction(self) -> Fraction:
        return Fraction(int(self.values.sum(dtype=np.int64)), 1 << self.n)

    def variance_fraction(self) -> Fraction:
        mean = self.mean_fraction()
        return 1 - mean * mean


def truth_table(evaluator, coins: Optional[tuple] = None) -> TruthTable:
    """Tabulate an evaluator's output on every input with fixed coins.

    A zero-error evaluator's table is the function itself; the default
    coin assignment is the first enumerable one.
    """
    if coins is None:
        all_coins = evaluator.enumerate_coins()
        if not all_coins:
            raise ValueError("pass coins explicitly for this evaluator")
        coins = all_coins[0]
    if evaluator.n > TABLE_SIZE_LIMIT:
        raise ValueError(f"truth tables guarded at n <= {TABLE_SIZE_LIMIT}")
    return TruthTable(n=evaluator.n, values=runners.truth_values(evaluator, coins))


def truth_table_from_callable(fn: Callable[[InputTape], int], n: int) -> TruthTable:
    if n > TABLE_SIZE_LIMIT:
        raise ValueError(f"truth tables guarded at n <= {TABLE_SIZE_LIMIT}")
    values = np.zeros(1 << n, dtype=np.int8)
    for x in range(1 << n):
        bits = runners.input_matrix(x, x + 1, n)[0]
        values[x] = fn(InputTape(bits))
    return TruthTable(n=n, values=values)


@dataclass
class FourierTable:
    """Level-0/level-1 Fourier data plus influences of a +-1 function."""

    n: int
    mean: float  # coefficient of the empty set
    level1: np.ndarray  # coefficient of {i}
    influences: np.ndarray
    variance: float
    balance_p: float  # Pr[f = +1]
    norm_sq: float  # E[f^2]; 1 for +-1-valued f


def fourier(table: TruthTable) -> FourierTable:
    """Exact expectations over all inputs; bit i maps to x_i = 2*bit - 1."""
    n = table.n
    v = table.values.astype(np.float64)
    mean = float(v.mean())
    level1 = np.zeros(n)
    infl = np.zeros(n)
    for i in range(n):
        split = v.reshape(-1, 2, 1 << i)
        lo, hi = split[:, 0, :], split[:, 1, :]
        level1[i] = (hi.sum() - lo.sum()) / (1 << n)
        infl[i] = float((hi != lo).mean())
    return FourierTable(
        n=n,
        mean=mean,
        level1=level1,
        influences=infl,
        variance=1.0 - mean * mean,
        balance_p=float((table.values == 1).mean()),
        norm_sq=1.0,
    )


def monotonicity_violations(table: TruthTable) -> int:
    """Number of (input, bit) pairs where a 0->1 flip lowers the output."""
    total = 0
    for i in range(table.n):
        split = table.values.reshape(-1, 2, 1 << i)
        total += int((split[:, 1, :] < split[:, 0, :]).sum())
    return total


def is_monotone(table: TruthTable) -> bool:
    return monotonicity_violations(table) == 0


# ---------------------------------------------------------------------------
# inequality checks

EXACT_TOL = 1e-9


@dataclass
class InequalityRecord:
    name: str
    left: float
    right: float
    tolerance: float

    @property
    def slack(self) -> float:
        return self.right - self.left

    @property
    def passed(self) -> bool:
        return self.left <= self.right + self.tolerance


@dataclass
class InequalityReport:
    records: list[InequalityRecord] = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.records)

    def csv_rows(self):
        for r in self.records:
            yield r.name, r.left, r.right, r.slack, r.passed

    def to_csv(self) -> str:
        lines = ["name,left,right,slack,pass"]
        for name, left, right, slack, passed in self.csv_rows():
            lines.append(f"{name},{left!r},{right!r},{slack!r},{passed}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            [
                {
                    "name": r.name,
                    "left": r.left,
                    "right": r.right,
                    "slack": r.slack,
                    "pass": r.passed,
                }
                for r in self.records
            ]
        )


def check_inequalities(
    ft: FourierTable,
    rev: RevealmentReport,
    monotone: bool = False,
    zero_error: bool = True,
) -> InequalityReport:
    """The five read-probability inequalities for one (function, evaluator).

    Exact-mode reports are checked to 1e-9; sampled reports get a
    4-standard-error allowance propagated through each right-hand side.
    """
    if ft.n != rev.n:
        raise ValueError(f"function has n={ft.n} but revealment has n={rev.n}")
    n = ft.n
    delta = rev.delta_max
    exact = rev.mode == "exact"
    se = 0.0 if exact else rev.delta_max_se

    def tol(d_right_d_delta: float) -> float:
        return EXACT_TOL + 4.0 * se * abs(d_right_d_delta)

    records = [
        InequalityRecord(
            "level1-sum-vs-sqrt-n-delta",
            left=float(ft.level1.sum()),
            right=math.sqrt(n * delta),
            tolerance=tol(math.sqrt(n / delta) / 2 if delta > 0 else 0.0),
        ),
        InequalityRecord(
            "level1-weight-vs-delta",
            left=float((ft.level1**2).sum()),
            right=delta * 1.0 * ft.norm_sq,
            tolerance=tol(ft.norm_sq),
        ),
        InequalityRecord(
            "variance-vs-weighted-influence",
            left=ft.variance,
            right=float((rev.delta_i * ft.influences).sum()),
            tolerance=EXACT_TOL
            + (0.0 if exact else 4.0 * float(np.sqrt(((rev.se_i * ft.influences) ** 2).sum()))),
        ),
    ]
    if zero_error:
        records.append(
            InequalityRecord(
                "zero-error-delta-floor",
                left=math.sqrt(ft.variance / (2 * n)),
                right=delta,
                tolerance=tol(1.0),
            )
        )
    if monotone:
        records.append(
            InequalityRecord(
                "monotone-variance-ceiling",
                left=ft.variance,
                right=delta**1.5 * math.sqrt(n),
                tolerance=tol(1.5 * math.sqrt(delta * n)),
            )
        )
    return InequalityReport(records)


def zero_error_floor_exact(table: TruthTable, rev: RevealmentReport) -> bool:
    """Var(f)/(2n) <= delta^2, in exact rational arithmetic."""
    d = rev.delta_max_fraction()
    return d * d * 2 * table.n >= table.variance_fraction()


def monotone_ceiling_exact(table: TruthTable, rev: RevealmentReport) -> bool:
    """Var(f)^2 <= delta^3 * n, in exact rational arithmetic."""
    d = rev.delta_max_fraction()
    var = table.variance_fraction()
    return var * var <= d**3 * table.n


# ---------------------------------------------------------------------------
# two-run splice experiment


@dataclass
class SpliceReport:
    """Collision and replay statistics of two independent runs."""

    trials: int
    mean_n: float
    freq_n_positive: float
    se_freq: float
    sum_delta_sq: float
    agreement_rate: float
    replay_first_rate: float  # A(r,z) == A(r,x), all trials
    replay_second_rate: float  # A(s,z) == A(s,y), among N == 0 trials
    zero_n_trials: int

    @property
    def collision_bound_holds(self) -> bool:
        return self.freq_n_positive <= self.sum_delta_sq + 4 * self.se_freq

    def to_json(self) -> str:
        return json.dumps(
            {
                "trials": self.trials,
                "mean_n": self.mean_n,
                "freq_n_positive": self.freq_n_positive,
                "se_freq": self.se_freq,
                "sum_delta_sq": self.sum_delta_sq,
                "agreement_rate": self.agreement_rate,
                "replay_first_rate": self.replay_first_rate,
                "replay_second_rate": self.replay_second_rate,
                "zero_n_trials": self.zero_n_trials,
                "collision_bound_holds": self.collision_bound_holds,
            },
            sort_keys=True,
        )


def splice_experiment(evaluator, trials: int, seed: int = 0) -> SpliceReport:
    """Run on independent (x, r) and (y, s); splice z from x's read set.

    N counts positions read by both runs.  Replaying coins r on z must
    reproduce the x-run exactly; when N = 0, replaying s on z reproduces
    the y-run, which is what turns collision scarcity into an error lower
    bound for balanced functions.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = evaluator.n
    read_counts = np.zeros(n, dtype=np.int64)
    n_sum = 0
    n_pos = 0
    agree = 0
    rep1 = 0
    rep2 = 0
    zero_n = 0
    for trial in range(trials):
        x = InputTape(tape_bits(seed, trial, n))
        y = InputTape(alt_tape_bits(seed, trial, n))
        coins_r = evaluator.draw_coins(coin_rng(seed, trial))
        coins_s = evaluator.draw_coins(coin_rng(seed, trial, alt=True))
        out_rx = evaluator.run(x, coins_r)
        out_sy = evaluator.run(y, coins_s)
        rx = x.log.flags
        ry = y.log.flags
        read_counts += rx
        read_counts += ry
        collisions = int((rx & ry).sum())
        n_sum += collisions
        if collisions > 0:
            n_pos += 1
        z = np.where(rx, x.bits, y.bits)
        out_rz = evaluator.run(InputTape(z), coins_r)
        out_sz = evaluator.run(InputTape(z), coins_s)
        if out_rz.value == out_rx.value:
            rep1 += 1
        if collisions == 0:
            zero_n += 1
            if out_sz.value == out_sy.value:
                rep2 += 1
        if out_rz.value == out_sz.value:
            agree += 1
    delta_hat = read_counts / (2 * trials)
    freq = n_pos / trials
    return SpliceReport(
        trials=trials,
        mean_n=n_sum / trials,
        freq_n_positive=freq,
        se_freq=math.sqrt(freq * (1 - freq) / trials),
        sum_delta_sq=float((delta_hat**2).sum()),
        agreement_rate=agree / trials,
        replay_first_rate=rep1 / trials,
        replay_second_rate=rep2 / zero_n if zero_n else 1.0,
        zero_n_trials=zero_n,
    )
