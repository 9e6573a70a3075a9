"""Low-revealment balanced Boolean functions on the wrapped butterfly.

Two random-subgraph ensembles (routing bits / edge percolation) give
balanced Boolean functions whose zero-error evaluators read every input
bit with small probability; this package implements the functions, their
Las Vegas and Monte Carlo evaluators, and a measurement layer that checks
balance, read-probability scaling, cycle-count moments, and the matching
lower-bound inequalities at desk scale.
"""

from .butterfly import (
    ButterflyParams,
    VertexId,
    bit_index,
    edge_bit_index,
    params_for,
    position_to_vertex,
    predecessors,
    successor,
)
from .kernels import BACKEND
from .monotone import (
    C_STAR,
    SUITABLE_TARGET,
    MonotoneFunctionSpec,
    calibrate_k,
    default_width,
    edge_open,
    evaluate_las_vegas_monotone,
    evaluate_monte_carlo_monotone,
    f_monotone,
    mean_tree_survival,
    second_moment_experiment,
    tree_survival,
    winding_cycles,
)
from .nonmonotone import (
    CycleSet,
    consecutive_ones_bit,
    evaluate_las_vegas,
    evaluate_monte_carlo,
    f_lex,
    f_symmetric,
    find_all_cycles,
    out_vertex,
)
from .tape import EvalOutcome, InputTape, ReadLog, coin_rng, make_tape, tape_bits

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ButterflyParams",
    "C_STAR",
    "CycleSet",
    "EvalOutcome",
    "InputTape",
    "MonotoneFunctionSpec",
    "ReadLog",
    "SUITABLE_TARGET",
    "VertexId",
    "bit_index",
    "calibrate_k",
    "coin_rng",
    "consecutive_ones_bit",
    "default_width",
    "edge_bit_index",
    "edge_open",
    "evaluate_las_vegas",
    "evaluate_las_vegas_monotone",
    "evaluate_monte_carlo",
    "evaluate_monte_carlo_monotone",
    "f_lex",
    "f_monotone",
    "f_symmetric",
    "find_all_cycles",
    "make_tape",
    "mean_tree_survival",
    "out_vertex",
    "params_for",
    "position_to_vertex",
    "predecessors",
    "second_moment_experiment",
    "successor",
    "tape_bits",
    "tree_survival",
    "winding_cycles",
]
