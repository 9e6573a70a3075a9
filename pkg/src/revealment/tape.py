"""Input tape with read instrumentation.

Evaluation algorithms see input bits only through :meth:`InputTape.read`,
which records the set of distinct positions touched.  Per-bit read
frequencies over many runs are exactly the quantities the measurement
layer estimates.

Pseudorandom tapes are derived counter-style from (master seed, trial
index): the same (seed, trial, position) always yields the same bit, no
matter in which order trials are generated, so trial-level parallelism
cannot perturb results.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

_MASK64 = (1 << 64) - 1

# Domain tags keep the per-trial streams for tape bits, algorithm coins,
# and the paired streams used by the splice experiment disjoint.
DOMAIN_TAPE = 0
DOMAIN_COINS = 1
DOMAIN_TAPE_ALT = 2
DOMAIN_COINS_ALT = 3


def _stream(seed: int, trial: int, domain: int) -> np.random.Generator:
    if trial < 0:
        raise ValueError(f"trial index must be >= 0, got {trial}")
    key = [seed & _MASK64, ((trial << 3) | domain) & _MASK64]
    return np.random.Generator(np.random.Philox(key=key))


def tape_bits(seed: int, trial: int, n: int) -> np.ndarray:
    """Uniform bits for one trial; bit i is fixed by (seed, trial, i)."""
    if n == 0:
        return np.zeros(0, dtype=np.uint8)
    raw = _stream(seed, trial, DOMAIN_TAPE).bytes((n + 7) // 8)
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    return bits[:n].copy()


def coin_rng(seed: int, trial: int, alt: bool = False) -> np.random.Generator:
    """Generator for one run's internal coins (start slice, start points...)."""
    return _stream(seed, trial, DOMAIN_COINS_ALT if alt else DOMAIN_COINS)


def bits_from_hex(s: str, n: int) -> np.ndarray:
    """Parse a hex string into n bits, least-significant bit = position 0."""
    value = int(s, 16)
    if value < 0:
        raise ValueError("hex input must be nonnegative")
    if value >> n:
        raise ValueError(f"hex input does not fit in {n} bits")
    return np.array([(value >> i) & 1 for i in range(n)], dtype=np.uint8)


def bits_to_hex(bits: Sequence[int]) -> str:
    value = 0
    for i, b in enumerate(bits):
        if b:
            value |= 1 << i
    width = (len(bits) + 3) // 4
    return format(value, f"0{max(width, 1)}x")


def bits_from_int(value: int, n: int) -> np.ndarray:
    """Bit i of value becomes position i; used by exhaustive enumerations."""
    return np.array([(value >> i) & 1 for i in range(n)], dtype=np.uint8)


class ReadLog:
    """Which positions have been read; flags only ever go False -> True."""

    def __init__(self, n: int):
        self.flags = np.zeros(n, dtype=bool)

    def mark(self, i: int) -> None:
        self.flags[i] = True

    @property
    def read_count(self) -> int:
        return int(self.flags.sum())

    def positions(self) -> set[int]:
        return set(np.flatnonzero(self.flags).tolist())


class InputTape:
    """An n-bit input readable one position at a time, with logging."""

    def __init__(self, bits: np.ndarray):
        self.bits = np.ascontiguousarray(bits, dtype=np.uint8)
        if self.bits.ndim != 1:
            raise ValueError("tape bits must be one-dimensional")
        self.log = ReadLog(self.n)

    @property
    def n(self) -> int:
        return int(self.bits.shape[0])

    def read(self, i: int) -> int:
        """Return bit i and mark it read (idempotent in the log)."""
        if not (0 <= i < self.n):
            raise IndexError(f"read position {i} out of range for n={self.n}")
        self.log.mark(i)
        return int(self.bits[i])

    def read_set(self) -> set[int]:
        return self.log.positions()

    @property
    def read_count(self) -> int:
        return self.log.read_count

    def fresh_copy(self) -> "InputTape":
        """Same bit values, empty read log."""
        return InputTape(self.bits)


def make_tape(
    n: int,
    bits: Optional[Iterable[int]] = None,
    hex_input: Optional[str] = None,
    seed: Optional[int] = None,
    trial: int = 0,
    alt: bool = False,
) -> InputTape:
    """Create a tape from explicit bits, a hex string, or a seeded stream."""
    given = sum(x is not None for x in (bits, hex_input, seed))
    if given != 1:
        raise ValueError("provide exactly one of bits, hex_input, seed")
    if bits is not None:
        arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits)
        arr = arr.astype(np.uint8)
        if arr.shape != (n,):
            raise ValueError(f"expected {n} bits, got {arr.shape}")
        if arr.max(initial=0) > 1:
            raise ValueError("tape bits must be 0 or 1")
        return InputTape(arr)
    if hex_input is not None:
        return InputTape(bits_from_hex(hex_input, n))
    return InputTape(alt_tape_bits(seed, trial, n) if alt else tape_bits(seed, trial, n))


def alt_tape_bits(seed: int, trial: int, n: int) -> np.ndarray:
    """Second independent tape stream for the same (seed, trial)."""
    if n == 0:
        return np.zeros(0, dtype=np.uint8)
    raw = _stream(seed, trial, DOMAIN_TAPE_ALT).bytes((n + 7) // 8)
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    return bits[:n].copy()


@dataclass
class EvalOutcome:
    """Result of one evaluator run: output value plus the read instrument."""

    value: int  # in {-1, +1}
    tape: InputTape
    t0: Optional[int] = None
    starts: Optional[tuple[int, ...]] = None
    t0_pair: Optional[tuple[int, int]] = None
    extra: dict = field(default_factory=dict)

    @property
    def bits_read(self) -> int:
        return self.tape.read_count

    def read_set(self) -> set[int]:
        return self.tape.read_set()
