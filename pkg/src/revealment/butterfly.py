"""Topology of the wrapped butterfly graph and canonical input-bit layouts.

The graph has H = 2**d vertices per time slice and W time slices, with the
time coordinate wrapped modulo W.  Vertex (h, t) has directed edges to
(2h mod H, t+1 mod W) and (2h+1 mod H, t+1 mod W).  Every function here is
a pure function of immutable parameters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

#: bits stored at each vertex, per ensemble
ENSEMBLE_SLOTS = {
    "nonmonotone": 1,
    "nonmonotone-symmetric": 4,
    "monotone": 2,
    "monotone-balanced-pair": 4,
}


class VertexId(NamedTuple):
    h: int
    t: int


@dataclass(frozen=True)
class ButterflyParams:
    """Graph dimensions plus the bit layout of one subgraph ensemble.

    The ensemble decides how vertices consume input bits:

    * ``nonmonotone``: one routing bit per vertex (n = HW).
    * ``nonmonotone-symmetric``: four bits per vertex whose parity routes
      (n = 4HW).
    * ``monotone``: one openness bit per outgoing edge (n = 2HW).
    * ``monotone-balanced-pair``: two independent monotone experiments
      concatenated (n = 4HW).

    Balance of the routing-bit functions additionally needs W > d, and the
    winding-cycle/bit-string correspondence needs W >= d; those constraints
    are enforced by the functions that rely on them, not here.
    """

    d: int
    W: int
    ensemble: str = "nonmonotone"

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d}")
        if self.W < 1:
            raise ValueError(f"W must be a positive integer, got {self.W}")
        if self.ensemble not in ENSEMBLE_SLOTS:
            raise ValueError(
                f"unknown ensemble {self.ensemble!r}; expected one of "
                f"{sorted(ENSEMBLE_SLOTS)}"
            )

    @property
    def H(self) -> int:
        return 1 << self.d

    @property
    def slots(self) -> int:
        return ENSEMBLE_SLOTS[self.ensemble]

    @property
    def experiments(self) -> int:
        return 2 if self.ensemble == "monotone-balanced-pair" else 1

    @property
    def vertex_bits(self) -> int:
        """n for a single experiment's worth of bits."""
        return self.slots // self.experiments * self.H * self.W

    @property
    def n(self) -> int:
        return self.slots * self.H * self.W

    def check_vertex(self, v: VertexId) -> None:
        if not (0 <= v.h < self.H and 0 <= v.t < self.W):
            raise ValueError(f"vertex {v} out of range for H={self.H}, W={self.W}")


def params_for(H: int, W: int, ensemble: str = "nonmonotone") -> ButterflyParams:
    """Build parameters from H directly; H must be a power of two >= 2."""
    d = H.bit_length() - 1
    if H < 2 or (1 << d) != H:
        raise ValueError(f"H must be a power of two >= 2, got {H}")
    return ButterflyParams(d=d, W=W, ensemble=ensemble)


def successor(params: ButterflyParams, v: VertexId, b: int) -> VertexId:
    """The endpoint of v's outgoing edge selected by bit b."""
    params.check_vertex(v)
    if b not in (0, 1):
        raise ValueError(f"edge bit must be 0 or 1, got {b}")
    return VertexId((2 * v.h + b) % params.H, (v.t + 1) % params.W)


def predecessors(params: ButterflyParams, v: VertexId) -> tuple[VertexId, VertexId]:
    """The two vertices with an edge into v.

    Both map back to v under successor with edge bit b = v.h mod 2.
    """
    params.check_vertex(v)
    tp = (v.t - 1) % params.W
    half = v.h >> 1
    return (VertexId(half, tp), VertexId(half + params.H // 2, tp))


def flat_index(params: ButterflyParams, v: VertexId) -> int:
    """Canonical vertex order: h + H*t (slice-major within vertex)."""
    return v.h + params.H * v.t


def vertex_from_flat(params: ButterflyParams, idx: int) -> VertexId:
    return VertexId(idx % params.H, idx // params.H)


def bit_index(params: ButterflyParams, v: VertexId, slot: int = 0) -> int:
    """Position of a vertex's slot bit in the canonical input layout.

    Layouts are bit-exact and shared by every file/CLI input:
    nonmonotone h+Ht; symmetric 4(h+Ht)+slot; monotone 2(h+Ht)+slot where
    slot selects the edge to (2h+slot mod H, t+1); the balanced pair packs
    two monotone experiments, experiment e = slot>>1 at offset e*2HW.
    """
    params.check_vertex(v)
    if not (0 <= slot < params.slots):
        raise ValueError(f"slot {slot} out of range for ensemble {params.ensemble!r}")
    flat = v.h + params.H * v.t
    if params.ensemble == "nonmonotone":
        return flat
    if params.ensemble == "nonmonotone-symmetric":
        return 4 * flat + slot
    if params.ensemble == "monotone":
        return 2 * flat + slot
    # monotone-balanced-pair
    experiment, which = slot >> 1, slot & 1
    return experiment * 2 * params.H * params.W + 2 * flat + which


def position_to_vertex(params: ButterflyParams, pos: int) -> tuple[VertexId, int]:
    """Inverse of bit_index: (vertex, slot) owning input position pos."""
    if not (0 <= pos < params.n):
        raise ValueError(f"position {pos} out of range for n={params.n}")
    if params.ensemble == "nonmonotone":
        return vertex_from_flat(params, pos), 0
    if params.ensemble == "nonmonotone-symmetric":
        return vertex_from_flat(params, pos // 4), pos % 4
    if params.ensemble == "monotone":
        return vertex_from_flat(params, pos // 2), pos % 2
    per = 2 * params.H * params.W
    experiment, rest = divmod(pos, per)
    return vertex_from_flat(params, rest // 2), experiment * 2 + rest % 2


def edge_bit_index(
    params: ButterflyParams, v: VertexId, which: int, experiment: int = 0
) -> int:
    """Position of the openness bit of v's edge to (2h+which, t+1).

    Valid for the monotone layouts; experiment selects the half of the
    balanced-pair layout.
    """
    if params.ensemble == "monotone":
        if experiment != 0:
            raise ValueError("single-experiment layout has experiment 0 only")
        return bit_index(params, v, which)
    if params.ensemble == "monotone-balanced-pair":
        if experiment not in (0, 1):
            raise ValueError(f"experiment must be 0 or 1, got {experiment}")
        return bit_index(params, v, experiment * 2 + which)
    raise ValueError(f"ensemble {params.ensemble!r} has no edge bits")
