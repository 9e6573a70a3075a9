import pytest
from hypothesis import given, strategies as st

from revealment.butterfly import (
    ButterflyParams,
    VertexId,
    bit_index,
    edge_bit_index,
    flat_index,
    params_for,
    position_to_vertex,
    predecessors,
    successor,
    vertex_from_flat,
)


def test_successor_examples():
    assert successor(params_for(8, 5), VertexId(3, 2), 1) == VertexId(7, 3)
    assert successor(params_for(4, 3), VertexId(3, 2), 0) == VertexId(2, 0)
    assert successor(params_for(2, 2), VertexId(1, 1), 1) == VertexId(1, 0)


def test_predecessor_examples():
    assert set(predecessors(params_for(8, 5), VertexId(5, 3))) == {
        VertexId(2, 2),
        VertexId(6, 2),
    }
    assert set(predecessors(params_for(4, 3), VertexId(0, 0))) == {
        VertexId(0, 2),
        VertexId(2, 2),
    }
    assert set(predecessors(params_for(2, 2), VertexId(0, 1))) == {
        VertexId(0, 0),
        VertexId(1, 0),
    }


@given(st.integers(1, 6), st.integers(1, 9), st.data())
def test_successor_predecessor_inverse(d, W, data):
    params = ButterflyParams(d=d, W=W)
    h = data.draw(st.integers(0, params.H - 1))
    t = data.draw(st.integers(0, W - 1))
    b = data.draw(st.integers(0, 1))
    v = VertexId(h, t)
    w = successor(params, v, b)
    assert v in predecessors(params, w)
    # and each predecessor maps back with bit = w.h mod 2
    for u in predecessors(params, w):
        assert successor(params, u, w.h & 1) == w


@pytest.mark.parametrize("H,W", [(2, 2), (8, 3), (64, 5)])
def test_degrees_exhaustive(H, W):
    params = params_for(H, W)
    out_count = {}
    in_count = {}
    for t in range(W):
        for h in range(H):
            v = VertexId(h, t)
            outs = {successor(params, v, 0), successor(params, v, 1)}
            assert len(outs) == 2
            out_count[v] = len(outs)
            for w in outs:
                in_count[w] = in_count.get(w, 0) + 1
    assert all(c == 2 for c in out_count.values())
    assert all(c == 2 for c in in_count.values())
    assert len(in_count) == H * W


def test_bit_index_examples():
    assert bit_index(params_for(4, 3), VertexId(2, 1)) == 6
    assert bit_index(params_for(4, 3, "monotone"), VertexId(2, 1), 1) == 13
    assert bit_index(params_for(2, 2, "nonmonotone-symmetric"), VertexId(1, 1), 3) == 15


@pytest.mark.parametrize(
    "ensemble", ["nonmonotone", "nonmonotone-symmetric", "monotone", "monotone-balanced-pair"]
)
def test_bit_index_bijection(ensemble):
    params = params_for(4, 3, ensemble)
    seen = set()
    for t in range(params.W):
        for h in range(params.H):
            for slot in range(params.slots):
                pos = bit_index(params, VertexId(h, t), slot)
                assert 0 <= pos < params.n
                assert position_to_vertex(params, pos) == (VertexId(h, t), slot)
                seen.add(pos)
    assert len(seen) == params.n


def test_flat_index_roundtrip():
    params = params_for(8, 5)
    for flat in range(params.H * params.W):
        assert flat_index(params, vertex_from_flat(params, flat)) == flat


def test_pair_layout_offsets():
    params = params_for(4, 3, "monotone-balanced-pair")
    per = 2 * params.H * params.W
    v = VertexId(1, 2)
    assert edge_bit_index(params, v, 0, experiment=1) == per + edge_bit_index(
        params, v, 0, experiment=0
    )


def test_validation_errors():
    with pytest.raises(ValueError):
        ButterflyParams(d=0, W=3)
    with pytest.raises(ValueError):
        ButterflyParams(d=2, W=0)
    with pytest.raises(ValueError):
        ButterflyParams(d=2, W=3, ensemble="nonesuch")
    with pytest.raises(ValueError):
        params_for(6, 3)  # not a power of two
    params = params_for(4, 3)
    with pytest.raises(ValueError):
        successor(params, VertexId(4, 0), 0)
    with pytest.raises(ValueError):
        successor(params, VertexId(0, 0), 2)
    with pytest.raises(ValueError):
        bit_index(params, VertexId(0, 0), slot=1)
    with pytest.raises(ValueError):
        edge_bit_index(params, VertexId(0, 0), 0)


def test_ensemble_bit_counts():
    assert params_for(4, 3).n == 12
    assert params_for(4, 3, "nonmonotone-symmetric").n == 48
    assert params_for(4, 3, "monotone").n == 24
    assert params_for(4, 3, "monotone-balanced-pair").n == 48
