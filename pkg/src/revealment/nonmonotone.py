"""Routing-bit ensemble: each vertex keeps exactly one outgoing edge.

The vertex's input bit (or the parity of its four bits, in the symmetric
variant) selects which of the two outgoing edges survives, so the random
subgraph is a functional graph and always contains at least one directed
cycle.  The Boolean functions here are statistics of those cycles, and the
evaluators discover the cycles by following paths forward in time.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .butterfly import ButterflyParams, VertexId, bit_index, successor
from .tape import EvalOutcome, InputTape, coin_rng


@dataclass
class CycleSet:
    """Directed cycles of a routing subgraph, as full vertex sequences.

    Each cycle is listed once, starting from its smallest-h vertex in the
    discovery slice; consecutive vertices satisfy the successor relation
    under the routing bits, and the sequence length is winding * W.
    """

    W: int
    cycles: list[list[VertexId]]

    @property
    def winding(self) -> list[int]:
        return [len(c) // self.W for c in self.cycles]

    def slice0_members(self) -> list[set[int]]:
        return [{v.h for v in c if v.t == 0} for c in self.cycles]

    def vertex_set(self) -> set[VertexId]:
        out: set[VertexId] = set()
        for c in self.cycles:
            out.update(c)
        return out


def _require_routing(params: ButterflyParams) -> None:
    if params.ensemble not in ("nonmonotone", "nonmonotone-symmetric"):
        raise ValueError(f"routing ensemble required, got {params.ensemble!r}")


def routing_bit(params: ButterflyParams, v: VertexId, tape: InputTape) -> int:
    """The bit steering v's unique outgoing edge.

    In the symmetric variant this is the parity of the vertex's four slot
    bits, so all four get read.
    """
    if params.ensemble == "nonmonotone":
        return tape.read(bit_index(params, v))
    b = 0
    for slot in range(4):
        b ^= tape.read(bit_index(params, v, slot))
    return b


def out_vertex(params: ButterflyParams, v: VertexId, tape: InputTape) -> VertexId:
    """Follow v's surviving outgoing edge, reading its routing bit(s)."""
    _require_routing(params)
    return successor(params, v, routing_bit(params, v, tape))


def _first_return(
    params: ButterflyParams, tape: InputTape, t0: int
) -> tuple[list[int], list[int]]:
    """Trace all H paths from slice t0 forward W steps.

    Returns the first-return map F on slice-t0 vertices and the number of
    distinct active paths after each step.  Merged paths read each vertex
    once (the read log is idempotent), which is the coalescing traversal.
    """
    H, W = params.H, params.W
    cur = list(range(H))
    active = [H]
    for s in range(W):
        t = (t0 + s) % W
        nxt = {}
        for h in set(cur):
            nxt[h] = (2 * h + routing_bit(params, VertexId(h, t), tape)) % H
        cur = [nxt[h] for h in cur]
        active.append(len(set(cur)))
    return cur, active


def _cyclic_elements(first_return: list[int]) -> list[int]:
    """Elements of a functional graph that lie on its cycles."""
    H = len(first_return)
    g = list(first_return)
    k = 1
    while k < H:
        g = [g[g[u]] for u in range(H)]
        k *= 2
    return sorted(set(g))


def find_all_cycles(params: ButterflyParams, tape: InputTape, t0: int) -> CycleSet:
    """All directed cycles of the routing subgraph, discovered from slice t0.

    Follows every path starting in slice t0 forward until the slice is
    reached again, coalescing merged paths, then expands the cyclic orbits
    of the first-return map into full vertex sequences.  The resulting set
    of cycles does not depend on t0.
    """
    _require_routing(params)
    if not (0 <= t0 < params.W):
        raise ValueError(f"t0 must lie in [0, {params.W}), got {t0}")
    H, W = params.H, params.W
    first_return, _ = _first_return(params, tape, t0)
    cyclic = _cyclic_elements(first_return)

    cycles: list[list[VertexId]] = []
    seen: set[int] = set()
    for start in cyclic:
        if start in seen:
            continue
        # one orbit of the first-return map = one cycle
        orbit = [start]
        u = first_return[start]
        while u != start:
            orbit.append(u)
            u = first_return[u]
        seen.update(orbit)
        anchor = min(orbit)
        seq: list[VertexId] = []
        v = VertexId(anchor, t0)
        while True:
            seq.append(v)
            v = out_vertex(params, v, tape)
            if v == VertexId(anchor, t0):
                break
        cycles.append(seq)
    return CycleSet(W=W, cycles=cycles)


def active_path_counts(params: ButterflyParams, tape: InputTape, t0: int) -> list[int]:
    """Distinct active paths per step during coalescing discovery."""
    _require_routing(params)
    return _first_return(params, tape, t0)[1]


def _lex_slice0_vertex(cycle_set: CycleSet) -> int:
    candidates = set()
    for members in cycle_set.slice0_members():
        candidates.update(members)
    # every cycle crosses slice 0, so this is never empty
    return min(candidates)


def f_lex(params: ButterflyParams, tape: InputTape) -> int:
    """Bit of the smallest slice-0 vertex lying on a cycle, as +-1.

    Exact balance requires W > d.
    """
    if params.ensemble != "nonmonotone":
        raise ValueError("f_lex uses the one-bit-per-vertex layout")
    if params.W <= params.d:
        raise ValueError(f"need W > d for balance, got W={params.W}, d={params.d}")
    cycle_set = find_all_cycles(params, tape, t0=0)
    h0 = _lex_slice0_vertex(cycle_set)
    bit = tape.read(bit_index(params, VertexId(h0, 0)))
    return 1 if bit else -1


def consecutive_ones_bit(b0: int, b1: int, b2: int, b3: int) -> int:
    """1 iff the ones among the four bits number 1 or 2 and sit together
    in the cyclic order.

    Exactly 8 of the 16 patterns qualify, 4 in each parity class, so the
    bit is balanced and independent of the parity of the four inputs.
    """
    bits = (b0, b1, b2, b3)
    w = sum(bits)
    if w == 1:
        return 1
    if w == 2:
        return 1 if any(bits[i] and bits[(i + 1) % 4] for i in range(4)) else 0
    return 0


def f_symmetric(params: ButterflyParams, tape: InputTape) -> int:
    """XOR of the consecutive-ones bit over all cycle vertices, as +-1.

    Four bits per vertex: their parity routes, and a parity-independent
    balanced feature of the same four bits feeds the XOR, which makes the
    function symmetric in its input bits and exactly balanced for W > d.
    """
    if params.ensemble != "nonmonotone-symmetric":
        raise ValueError("f_symmetric uses the four-bits-per-vertex layout")
    if params.W <= params.d:
        raise ValueError(f"need W > d for balance, got W={params.W}, d={params.d}")
    cycle_set = find_all_cycles(params, tape, t0=0)
    acc = 0
    for v in cycle_set.vertex_set():
        slot_bits = [tape.read(bit_index(params, v, slot)) for slot in range(4)]
        acc ^= consecutive_ones_bit(*slot_bits)
    return 1 if acc else -1


def _cycle_value(params: ButterflyParams, tape: InputTape, cycle_set: CycleSet) -> int:
    """Apply the ensemble's output rule to an already-discovered cycle set."""
    if params.ensemble == "nonmonotone":
        h0 = _lex_slice0_vertex(cycle_set)
        return 1 if tape.read(bit_index(params, VertexId(h0, 0))) else -1
    acc = 0
    for v in cycle_set.vertex_set():
        slot_bits = [tape.read(bit_index(params, v, slot)) for slot in range(4)]
        acc ^= consecutive_ones_bit(*slot_bits)
    return 1 if acc else -1


def evaluate_las_vegas(
    params: ButterflyParams,
    tape: InputTape,
    seed: int = 0,
    trial: int = 0,
    t0: Optional[int] = None,
) -> EvalOutcome:
    """Zero-error evaluator: discover all cycles from a random slice.

    The output always equals the direct function value; randomness only
    moves the discovery slice and hence which bits get read.
    """
    _require_routing(params)
    if t0 is None:
        t0 = int(coin_rng(seed, trial).integers(params.W))
    cycle_set = find_all_cycles(params, tape, t0)
    value = _cycle_value(params, tape, cycle_set)
    return EvalOutcome(value=value, tape=tape, t0=t0)


def evaluate_monte_carlo(
    params: ButterflyParams,
    tape: InputTape,
    m: int,
    seed: int = 0,
    trial: int = 0,
    t0: Optional[int] = None,
    starts: Optional[list[int]] = None,
) -> EvalOutcome:
    """Follow only m random start points until their paths cycle.

    Starts are sampled uniformly with replacement (duplicates are wasted).
    A path that enters a previously traced path terminates and inherits
    that trace's terminal cycle, so discovered cycles are a subset of the
    true cycle set and the output may err when the true lexicographically
    minimal cycle goes undiscovered.  Intended regime is W = H.
    """
    _require_routing(params)
    if m < 1:
        raise ValueError(f"need at least one start point, got m={m}")
    if params.W != params.H:
        warnings.warn(
            f"Monte Carlo evaluator is tuned for W = H, got H={params.H}, "
            f"W={params.W}",
            stacklevel=2,
        )
    H, W = params.H, params.W
    rng = coin_rng(seed, trial)
    if t0 is None:
        t0 = int(rng.integers(W))
    if starts is None:
        starts = [int(x) for x in rng.integers(H, size=m)]

    owner: dict[int, int] = {}  # flat vertex -> index of the path that traced it
    path_cycle: list[Optional[int]] = []
    cycles: list[list[VertexId]] = []
    for p, h_start in enumerate(starts):
        h, t = h_start, t0
        trace_pos: dict[int, int] = {}
        trace: list[VertexId] = []
        while True:
            flat = h + H * t
            if flat in owner:
                if owner[flat] == p:
                    cyc = trace[trace_pos[flat]:]
                    cycles.append(cyc)
                    path_cycle.append(len(cycles) - 1)
                else:
                    path_cycle.append(path_cycle[owner[flat]])
                break
            owner[flat] = p
            trace_pos[flat] = len(trace)
            v = VertexId(h, t)
            trace.append(v)
            nxt = out_vertex(params, v, tape)
            h, t = nxt.h, nxt.t

    discovered = CycleSet(W=W, cycles=cycles)
    value = _cycle_value(params, tape, discovered)
    return EvalOutcome(
        value=value,
        tape=tape,
        t0=t0,
        starts=tuple(starts),
        extra={"discovered": discovered},
    )
