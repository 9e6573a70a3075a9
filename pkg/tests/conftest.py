"""Shared fixtures and independent brute-force oracles.

The oracles here deliberately avoid the package's traced/coalescing code
paths: cycle membership comes from iterating the full one-step successor
map, and winding cycles from exhaustive path search, so agreement with
the library is a genuine two-route check.
"""

import numpy as np
import pytest

import revealment as rv
from revealment import analysis, runners
from revealment.butterfly import bit_index, edge_bit_index
from revealment.monotone import MonotoneFunctionSpec


def brute_cycle_vertices(params, bits):
    """Flat indices of vertices on directed cycles of the routing subgraph.

    Iterates the full successor map enough times that only periodic
    vertices remain in the image.
    """
    H, W = params.H, params.W
    size = H * W
    nxt = np.zeros(size, dtype=np.int64)
    for t in range(W):
        for h in range(H):
            flat = h + H * t
            if params.slots == 1:
                b = int(bits[flat])
            else:
                b = 0
                for j in range(4):
                    b ^= int(bits[4 * flat + j])
            nxt[flat] = (2 * h + b) % H + H * ((t + 1) % W)
    g = nxt.copy()
    k = 1
    while k < size:
        g = g[g]
        k *= 2
    return set(g.tolist())


def brute_f_lex(params, bits):
    cyc = brute_cycle_vertices(params, bits)
    h0 = min(h for h in range(params.H) if h in cyc)  # slice 0: flat == h
    return 1 if bits[h0] else -1


def brute_winding_cycles(params, bits, experiment=0):
    """All open length-W cycles by exhaustive path search from slice 0."""
    H, W = params.H, params.W
    found = set()
    for h0 in range(H):
        stack = [(0, h0, (h0,))]
        while stack:
            s, h, path = stack.pop()
            if s == W:
                if h == h0:
                    found.add(tuple((path[i], i) for i in range(W)))
                continue
            for which in (0, 1):
                pos = edge_bit_index(params, rv.VertexId(h, s), which, experiment)
                if bits[pos]:
                    stack.append((s + 1, (2 * h + which) % H, path + ((2 * h + which) % H,)))
    return found


@pytest.fixture(scope="session")
def nonmono43():
    """Exact data for the routing ensemble at H=4, W=3."""
    params = rv.params_for(4, 3)
    lv = runners.NonmonotoneLasVegas(params)
    table = analysis.truth_table(lv, coins=(0,))
    rev = analysis.exact_revealment(lv)
    return params, lv, table, rev


@pytest.fixture(scope="session")
def mono22():
    """Exact data for the balanced pair at H=2, W=2, k=1."""
    spec = MonotoneFunctionSpec(rv.params_for(2, 2, "monotone-balanced-pair"), k=1)
    lv = runners.MonotoneLasVegas(spec)
    table = analysis.truth_table(lv, coins=(0, 0))
    rev = analysis.exact_revealment(lv)
    return spec, lv, table, rev
