"""Edge-percolation ensemble: every edge is open iff its input bit is 1.

Out-degrees are random here, so directed cycles need not exist; the
Boolean functions consult only winding cycles (directed cycles of length
exactly W, crossing every time slice once).  Cycle discovery propagates
origin-label sets along open edges, which caps the read probability of
any bit by an explicit binary-tree connection recursion.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .butterfly import ButterflyParams, VertexId, edge_bit_index
from .nonmonotone import CycleSet
from .tape import EvalOutcome, InputTape, coin_rng

#: width multiplier solving 1/(e^c + e^-c) = 1 - 1/sqrt(2)
C_STAR = math.acosh((2.0 + math.sqrt(2.0)) / 2.0)

#: calibration target for the suitable-set probability
SUITABLE_TARGET = 1.0 - 1.0 / math.sqrt(2.0)


def default_width(H: int) -> int:
    """The critical width floor(C_STAR * sqrt(2H)) for slice count H."""
    return int(C_STAR * math.sqrt(2.0 * H))


def tree_survival(t: int) -> float:
    """Probability the root of a depth-t binary tree reaches level t when
    each edge is open independently with probability 1/2.

    S_0 = 1 and S_{t+1} = S_t - S_t^2/4; decays like 4/t.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    s = 1.0
    for _ in range(t):
        s -= 0.25 * s * s
    return s


def mean_tree_survival(W: int) -> float:
    """Average of tree_survival over t = 0..W-1; bounds per-bit reads of
    the frontier evaluator."""
    s, total = 1.0, 0.0
    for _ in range(W):
        total += s
        s -= 0.25 * s * s
    return total / W


@dataclass(frozen=True)
class MonotoneFunctionSpec:
    """A balanced-pair function: two experiments plus a suitable-set size.

    The suitable set is {(0,0),...,(k-1,0)} in the first slice; the
    marginal vertex is (k-1,0).  marginal_policy names the fixed rule for
    the scenario where marginal cycles exist but complete ones don't.
    """

    params: ButterflyParams
    k: int
    marginal_policy: str = "suitable-in-both"

    def __post_init__(self):
        if self.params.ensemble != "monotone-balanced-pair":
            raise ValueError("spec requires the monotone-balanced-pair layout")
        if not (1 <= self.k <= self.params.H):
            raise ValueError(f"k must lie in [1, H], got k={self.k}")
        if self.marginal_policy != "suitable-in-both":
            raise ValueError(f"unknown marginal policy {self.marginal_policy!r}")


def _require_edges(params: ButterflyParams) -> None:
    if params.ensemble not in ("monotone", "monotone-balanced-pair"):
        raise ValueError(f"edge-bit ensemble required, got {params.ensemble!r}")


def edge_open(
    params: ButterflyParams,
    v: VertexId,
    which: int,
    tape: InputTape,
    experiment: int = 0,
) -> bool:
    """Read the bit of v's edge to (2h+which, t+1); open iff it is 1."""
    _require_edges(params)
    return bool(tape.read(edge_bit_index(params, v, which, experiment)))


def _forward_layers(
    params: ButterflyParams, tape: InputTape, t0: int, experiment: int
) -> list[list[int]]:
    """Origin-label propagation from all H vertices of slice t0.

    Layer s holds, for each vertex of slice (t0+s) mod W, the set (as a
    bitmask over origin h's) of origins with an open path of length s to
    it.  Both edge bits of every reached vertex in layers 0..W-1 are read.
    """
    H, W = params.H, params.W
    layers = [[1 << h for h in range(H)]]
    for s in range(W):
        t = (t0 + s) % W
        lab = layers[-1]
        nxt = [0] * H
        for h in range(H):
            if not lab[h]:
                continue
            if edge_open(params, VertexId(h, t), 0, tape, experiment):
                nxt[(2 * h) % H] |= lab[h]
            if edge_open(params, VertexId(h, t), 1, tape, experiment):
                nxt[(2 * h + 1) % H] |= lab[h]
        layers.append(nxt)
    return layers


def _backward_layers(
    params: ButterflyParams,
    tape: InputTape,
    t0: int,
    experiment: int,
    forward: list[list[int]],
) -> list[list[int]]:
    """Masks of origins reachable *from* each vertex in the remaining steps.

    Only consulted at vertices the forward pass reached, so it touches no
    input bit the forward pass has not already read.
    """
    H, W = params.H, params.W
    layers = [[0] * H for _ in range(W)] + [[1 << h for h in range(H)]]
    for s in range(W - 1, -1, -1):
        t = (t0 + s) % W
        nxt = layers[s + 1]
        cur = layers[s]
        for h in range(H):
            if not forward[s][h]:
                continue
            acc = 0
            if edge_open(params, VertexId(h, t), 0, tape, experiment):
                acc |= nxt[(2 * h) % H]
            if edge_open(params, VertexId(h, t), 1, tape, experiment):
                acc |= nxt[(2 * h + 1) % H]
            cur[h] = acc
        layers[s] = cur
    return layers


def slice0_cycle_flags(
    params: ButterflyParams, tape: InputTape, t0: int, experiment: int = 0
) -> list[bool]:
    """flags[j]: does some winding cycle pass through vertex (j, 0)?

    A winding cycle crosses every slice exactly once, so (j,0) is on one
    iff some origin u reaches (j,0) in s0 = (-t0 mod W) steps and (j,0)
    reaches u back in the remaining W - s0 steps.
    """
    _require_edges(params)
    if not (0 <= t0 < params.W):
        raise ValueError(f"t0 must lie in [0, {params.W}), got {t0}")
    H, W = params.H, params.W
    fwd = _forward_layers(params, tape, t0, experiment)
    bwd = _backward_layers(params, tape, t0, experiment, fwd)
    s0 = (W - t0) % W
    return [(fwd[s0][h] & bwd[s0][h]) != 0 for h in range(H)]


def _max_cycles() -> int:
    return int(os.environ.get("REVEALMENT_MAX_ENUM", 10**9)) // 8


def winding_cycles(
    params: ButterflyParams,
    tape: InputTape,
    t0: int,
    experiment: int = 0,
    max_cycles: Optional[int] = None,
) -> CycleSet:
    """All open directed cycles of length exactly W, as vertex sequences.

    Discovery runs the label frontier from slice t0; enumeration then
    walks only edges that can still close a cycle, so the work is
    proportional to the output.  Requires W >= d so that winding cycles
    correspond one-to-one with their parity strings.
    """
    _require_edges(params)
    if params.W < params.d:
        raise ValueError(f"need W >= d, got W={params.W}, d={params.d}")
    if max_cycles is None:
        max_cycles = _max_cycles()
    H, W = params.H, params.W
    fwd = _forward_layers(params, tape, t0, experiment)
    bwd = _backward_layers(params, tape, t0, experiment, fwd)

    cycles: list[list[VertexId]] = []
    for u in range(H):
        if not (fwd[W][u] >> u) & 1:
            continue
        ubit = 1 << u
        # depth-first over open edges that can still return to u
        stack = [(0, u, [u])]
        while stack:
            s, h, path = stack.pop()
            if s == W:
                cycles.append(
                    [VertexId(hh, (t0 + i) % W) for i, hh in enumerate(path[:-1])]
                )
                if len(cycles) > max_cycles:
                    raise RuntimeError(
                        f"more than {max_cycles} winding cycles; raise "
                        "REVEALMENT_MAX_ENUM to enumerate them"
                    )
                continue
            t = (t0 + s) % W
            for which in (0, 1):
                if not edge_open(params, VertexId(h, t), which, tape, experiment):
                    continue
                nh = (2 * h + which) % H
                if s + 1 == W:
                    if nh == u:
                        stack.append((W, nh, path + [nh]))
                elif bwd[s + 1][nh] & ubit:
                    stack.append((s + 1, nh, path + [nh]))
    return CycleSet(W=W, cycles=cycles)


def classify_experiment(flags: list[bool], k: int) -> str:
    """complete / marginal / none, from the slice-0 cycle flags."""
    if any(flags[j] for j in range(k - 1)):
        return "complete"
    if flags[k - 1]:
        return "marginal"
    return "none"


def _combine(states: tuple[str, str]) -> int:
    complete = any(s == "complete" for s in states)
    suitable = [s != "none" for s in states]
    if complete:
        return 1
    # fixed marginal policy: value 1 iff suitable cycles exist in BOTH
    # experiments (monotone and symmetric between the experiments)
    if suitable[0] and suitable[1]:
        return 1
    return -1


def f_monotone(
    spec: MonotoneFunctionSpec,
    tape: InputTape,
    t0s: tuple[int, int] = (0, 0),
) -> int:
    """Balanced-pair suitable-cycle function, as +-1.

    +1 if a completely suitable cycle (through (j,0), j < k-1) exists in
    either experiment; -1 if neither experiment has a suitable cycle; in
    the marginal scenario, +1 iff both experiments have a suitable cycle.
    Monotone: opening an edge can only create cycles.
    """
    states = []
    for e in range(2):
        flags = slice0_cycle_flags(spec.params, tape, t0s[e], experiment=e)
        states.append(classify_experiment(flags, spec.k))
    return _combine((states[0], states[1]))


def evaluate_las_vegas_monotone(
    spec: MonotoneFunctionSpec,
    tape: InputTape,
    seed: int = 0,
    trial: int = 0,
    t0s: Optional[tuple[int, int]] = None,
) -> EvalOutcome:
    """Frontier evaluator from an independent random slice per experiment.

    Always equals the full-information value: every winding cycle crosses
    every slice, so discovery from any slice is complete.
    """
    if t0s is None:
        rng = coin_rng(seed, trial)
        t0s = (int(rng.integers(spec.params.W)), int(rng.integers(spec.params.W)))
    value = f_monotone(spec, tape, t0s)
    return EvalOutcome(value=value, tape=tape, t0_pair=t0s)


def _explore_from_seeds(
    params: ButterflyParams,
    tape: InputTape,
    seeds: list[int],
    experiment: int,
) -> tuple[dict[int, int], set[int]]:
    """Open paths of length <= 2W from the seed vertices.

    Returns per-vertex depth masks (bit s set iff reached at depth s) and
    the set of vertices whose edge bits were read (reached at depth
    <= 2W-1).
    """
    H, W = params.H, params.W
    depth_cap = 2 * W
    depths: dict[int, int] = {}
    read: set[int] = set()
    level = set(seeds)
    for flat in level:
        depths[flat] = depths.get(flat, 0) | 1
    for s in range(depth_cap):
        nxt: set[int] = set()
        for flat in level:
            h, t = flat % H, flat // H
            read.add(flat)
            for which in (0, 1):
                if edge_open(params, VertexId(h, t), which, tape, experiment):
                    nflat = (2 * h + which) % H + H * ((t + 1) % W)
                    nxt.add(nflat)
        for flat in nxt:
            depths[flat] = depths.get(flat, 0) | (1 << (s + 1))
        level = nxt
    return depths, read


def _discovered_flags(
    params: ButterflyParams,
    tape: InputTape,
    experiment: int,
    depths: dict[int, int],
    read: set[int],
) -> list[bool]:
    """Which slice-0 vertices lie on a winding cycle the exploration found.

    A cycle counts as found iff some vertex of it was reached at depth
    <= W (the remaining budget then suffices to walk once around).  Only
    edges the exploration actually read are consulted.
    """
    H, W = params.H, params.W
    early_mask = (1 << (W + 1)) - 1

    def usable(h: int, t: int, which: int) -> bool:
        flat = h + H * t
        if flat not in read:
            return False
        return bool(tape.read(edge_bit_index(params, VertexId(h, t), which, experiment)))

    fwd = [[1 << j for j in range(H)]]
    for s in range(W):
        t = s % W
        lab = fwd[-1]
        nxt = [0] * H
        for h in range(H):
            if not lab[h]:
                continue
            for which in (0, 1):
                if usable(h, t, which):
                    nxt[(2 * h + which) % H] |= lab[h]
        fwd.append(nxt)
    bwd = [1 << j for j in range(H)]
    disc = 0
    for s in range(W - 1, -1, -1):
        t = s % W
        cur = [0] * H
        for h in range(H):
            if not fwd[s][h]:
                continue
            acc = 0
            for which in (0, 1):
                if usable(h, t, which):
                    acc |= bwd[(2 * h + which) % H]
            cur[h] = acc
        bwd = cur
        for h in range(H):
            flat = h + H * t
            if depths.get(flat, 0) & early_mask:
                disc |= fwd[s][h] & bwd[h]
    return [bool((disc >> j) & 1) for j in range(H)]


def evaluate_monte_carlo_monotone(
    spec: MonotoneFunctionSpec,
    tape: InputTape,
    m: int,
    seed: int = 0,
    trial: int = 0,
    seed_sets: Optional[tuple[list[int], list[int]]] = None,
    force_all_seeds: bool = False,
) -> EvalOutcome:
    """Sparse evaluator: explore open paths of length <= 2W from a random
    vertex set where each vertex is kept with probability m/H.

    May err only by missing cycles; with every vertex seeded (the test
    hook force_all_seeds) it agrees with the frontier evaluator.
    """
    if m < 1:
        raise ValueError(f"need m >= 1, got m={m}")
    params = spec.params
    H, W = params.H, params.W
    rng = coin_rng(seed, trial)
    states = []
    all_seeds: list[tuple[int, ...]] = []
    for e in range(2):
        if force_all_seeds:
            seeds = list(range(H * W))
        elif seed_sets is not None:
            seeds = list(seed_sets[e])
        else:
            keep = rng.random(H * W) < m / H
            seeds = [int(i) for i in np.flatnonzero(keep)]
        all_seeds.append(tuple(seeds))
        depths, read = _explore_from_seeds(params, tape, seeds, e)
        flags = _discovered_flags(params, tape, e, depths, read)
        states.append(classify_experiment(flags, spec.k))
    value = _combine((states[0], states[1]))
    return EvalOutcome(
        value=value,
        tape=tape,
        extra={"seed_sets": all_seeds},
    )


# ---------------------------------------------------------------------------
# winding-cycle / bit-string correspondence and cycle counting


def cycle_from_winding_string(
    params: ButterflyParams, string: list[int]
) -> list[VertexId]:
    """The candidate winding cycle whose route bits are the given string.

    string[t] is the edge bit used leaving slice t; the vertical
    coordinate at slice t is then determined by the d preceding bits in
    circular order.  Needs W >= d.
    """
    H, W, d = params.H, params.W, params.d
    if len(string) != W:
        raise ValueError(f"string must have length W={W}")
    if W < d:
        raise ValueError(f"need W >= d, got W={W}, d={d}")
    hs = []
    for t in range(W):
        h = 0
        for j in range(1, d + 1):
            h |= string[(t - j) % W] << (j - 1)
        hs.append(h)
    return [VertexId(h, t) for t, h in enumerate(hs)]


def winding_string_from_cycle(cycle: list[VertexId]) -> list[int]:
    """Inverse of cycle_from_winding_string: parities of the next slice's
    vertical coordinates."""
    W = len(cycle)
    by_slice = {v.t: v.h for v in cycle}
    return [by_slice[(t + 1) % W] & 1 for t in range(W)]


def count_winding_cycles_by_strings(
    bits: np.ndarray, params: ButterflyParams, experiment: int = 0
) -> int:
    """Count open winding cycles by trying all 2^W candidate strings.

    Independent of the graph-propagation code paths; exponential in W, so
    guarded at W <= 24.
    """
    W = params.W
    if W > 24:
        raise ValueError(f"string enumeration guarded at W <= 24, got W={W}")
    count = 0
    for word in range(1 << W):
        string = [(word >> t) & 1 for t in range(W)]
        cycle = cycle_from_winding_string(params, string)
        if all(
            bits[edge_bit_index(params, v, string[v.t], experiment)]
            for v in cycle
        ):
            count += 1
    return count


@dataclass
class SecondMomentReport:
    """Sample moments of the winding-cycle count N over uniform inputs."""

    H: int
    W: int
    c: float
    trials: int
    mean_n: float
    mean_n_sq: float
    freq_positive: float
    se_mean_n: float
    se_mean_n_sq: float
    se_freq_positive: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "H": self.H,
                "W": self.W,
                "c": self.c,
                "trials": self.trials,
                "mean_n": self.mean_n,
                "mean_n_sq": self.mean_n_sq,
                "freq_positive": self.freq_positive,
                "se_mean_n": self.se_mean_n,
                "se_mean_n_sq": self.se_mean_n_sq,
                "se_freq_positive": self.se_freq_positive,
            },
            sort_keys=True,
        )


def second_moment_experiment(
    H: int, W: int, trials: int, seed: int = 0
) -> SecondMomentReport:
    """Sample uniform inputs and report moments of the cycle count.

    The count is exact per input (dynamic-programming path count), so the
    only error is sampling error; E[N] = 1 at every size.
    """
    from . import runners  # local import: runners depends on this module

    if trials < 1:
        raise ValueError("trials must be >= 1")
    if W > 62:
        raise ValueError(f"exact counting overflows beyond W=62, got W={W}")
    counts = runners.winding_counts(H, W, trials, seed)
    nf = counts.astype(np.float64)
    mean_n = float(nf.mean())
    mean_sq = float((nf**2).mean())
    pos = float((counts > 0).mean())
    se = lambda arr: float(arr.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return SecondMomentReport(
        H=H,
        W=W,
        c=W / math.sqrt(2.0 * H),
        trials=trials,
        mean_n=mean_n,
        mean_n_sq=mean_sq,
        freq_positive=pos,
        se_mean_n=se(nf),
        se_mean_n_sq=se(nf**2),
        se_freq_positive=se((counts > 0).astype(np.float64)),
    )


@dataclass
class CalibrationResult:
    """Smallest suitable-set size whose cycle probability clears the target."""

    k: int
    prob: float
    se: float
    per_k_prob: np.ndarray
    per_vertex_freq: np.ndarray
    trials: int


def calibrate_k(
    params: ButterflyParams, trials: int, seed: int = 0
) -> CalibrationResult:
    """Estimate the smallest k with Pr[winding cycle through the first k
    slice-0 vertices] >= 1 - 1/sqrt(2).

    Warns when the trial count cannot resolve the 1/H per-vertex
    increments of the target probability.
    """
    from . import runners

    _require_edges(params)
    H = params.H
    flags = runners.slice0_flag_samples(params, trials, seed)  # (trials, H) bool
    per_vertex = flags.mean(axis=0)
    cum = np.logical_or.accumulate(flags, axis=1)
    per_k = cum.mean(axis=0)
    se_k = np.sqrt(np.maximum(per_k * (1 - per_k), 1e-12) / trials)
    if float(4 * se_k.max()) > 1.0 / H:
        warnings.warn(
            f"{trials} trials cannot resolve 1/H = {1.0 / H:.4g} probability "
            "increments; calibration of k is uncertain",
            stacklevel=2,
        )
    above = np.flatnonzero(per_k >= SUITABLE_TARGET)
    k = int(above[0]) + 1 if above.size else H
    return CalibrationResult(
        k=k,
        prob=float(per_k[k - 1]),
        se=float(se_k[k - 1]),
        per_k_prob=per_k,
        per_vertex_freq=per_vertex,
        trials=trials,
    )


def single_experiment_params(params: ButterflyParams) -> ButterflyParams:
    """The one-experiment layout with the same dimensions."""
    if params.ensemble == "monotone":
        return params
    if params.ensemble == "monotone-balanced-pair":
        return replace(params, ensemble="monotone")
    raise ValueError(f"edge-bit ensemble required, got {params.ensemble!r}")
