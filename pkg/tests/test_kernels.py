"""Backend parity: compiled vs NumPy kernels, and batch vs reference runs.

Every evaluator couples a per-tape reference implementation with a
kernel-backed batch path; identical coins must give identical values and
identical read flags.  The compiled extension must agree with the NumPy
module bit for bit.
"""

import numpy as np
import pytest

import revealment as rv
from revealment import kernels, runners
from revealment.monotone import MonotoneFunctionSpec
from revealment.tape import InputTape, coin_rng, tape_bits

try:
    COMPILED = kernels.get_backend("compiled")
except ImportError:
    COMPILED = None
PYTHON = kernels.get_backend("python")

EVALUATORS = [
    ("nonmono-lv-2x2", lambda: runners.NonmonotoneLasVegas(rv.params_for(2, 2))),
    ("nonmono-lv-8x5", lambda: runners.NonmonotoneLasVegas(rv.params_for(8, 5))),
    ("nonmono-lv-16x16", lambda: runners.NonmonotoneLasVegas(rv.params_for(16, 16))),
    (
        "symmetric-lv-4x3",
        lambda: runners.NonmonotoneLasVegas(rv.params_for(4, 3, "nonmonotone-symmetric")),
    ),
    ("nonmono-mc-8x8", lambda: runners.NonmonotoneMonteCarlo(rv.params_for(8, 8), 2)),
    ("nonmono-mc-16x16", lambda: runners.NonmonotoneMonteCarlo(rv.params_for(16, 16), 4)),
    (
        "mono-lv-2x2",
        lambda: runners.MonotoneLasVegas(
            MonotoneFunctionSpec(rv.params_for(2, 2, "monotone-balanced-pair"), k=1)
        ),
    ),
    (
        "mono-lv-16x6",
        lambda: runners.MonotoneLasVegas(
            MonotoneFunctionSpec(rv.params_for(16, 6, "monotone-balanced-pair"), k=3)
        ),
    ),
    ("mono-single-8x4", lambda: runners.MonotoneSingleLasVegas(rv.params_for(8, 4, "monotone"), k=2)),
    (
        "mono-mc-8x4",
        lambda: runners.MonotoneMonteCarlo(
            MonotoneFunctionSpec(rv.params_for(8, 4, "monotone-balanced-pair"), k=2), 2
        ),
    ),
    (
        "mono-mc-16x6",
        lambda: runners.MonotoneMonteCarlo(
            MonotoneFunctionSpec(rv.params_for(16, 6, "monotone-balanced-pair"), k=2), 4
        ),
    ),
]


def _reference_stats(ev, bits, coins):
    trials, n = bits.shape
    rc = np.zeros(n, dtype=np.int64)
    vals = np.zeros(trials, dtype=np.int8)
    nr = np.zeros(trials, dtype=np.int64)
    for i in range(trials):
        tape = InputTape(bits[i])
        out = ev.run(tape, coins[i])
        vals[i] = out.value
        fl = tape.log.flags
        rc += fl
        nr[i] = int(fl.sum())
    return rc, vals, nr


def _batch_stats(ev, bits, coins):
    trials, n = bits.shape
    rc = np.zeros(n, dtype=np.int64)
    vals = np.zeros(trials, dtype=np.int8)
    nr = np.zeros(trials, dtype=np.int64)
    ev.batch(bits, coins, rc, vals, nr)
    return rc, vals, nr


@pytest.mark.parametrize("name,factory", EVALUATORS, ids=[e[0] for e in EVALUATORS])
def test_batch_matches_reference(name, factory):
    ev = factory()
    trials = 60
    bits = np.stack([tape_bits(97, t, ev.n) for t in range(trials)])
    coins = [ev.draw_coins(coin_rng(97, t)) for t in range(trials)]
    ref = _reference_stats(ev, bits, coins)
    bat = _batch_stats(ev, bits, coins)
    for r, b in zip(ref, bat):
        assert (r == b).all()


@pytest.mark.skipif(COMPILED is None, reason="compiled extension not built")
@pytest.mark.parametrize("name,factory", EVALUATORS, ids=[e[0] for e in EVALUATORS])
def test_compiled_matches_python_backend(name, factory, monkeypatch):
    ev = factory()
    trials = 80
    bits = np.stack([tape_bits(31, t, ev.n) for t in range(trials)])
    coins = [ev.draw_coins(coin_rng(31, t)) for t in range(trials)]
    outs = {}
    for label, backend in (("compiled", COMPILED), ("python", PYTHON)):
        for fn in (
            "nonmono_lv_batch",
            "nonmono_mc_batch",
            "mono_lv_values_batch",
            "mono_lv_reads_batch",
            "mono_mc_batch",
            "winding_count_batch",
        ):
            monkeypatch.setattr(kernels, fn, getattr(backend, fn))
        outs[label] = _batch_stats(ev, bits, coins)
    for a, b in zip(outs["compiled"], outs["python"]):
        assert (a == b).all()


@pytest.mark.skipif(COMPILED is None, reason="compiled extension not built")
@pytest.mark.parametrize("H,W", [(2, 2), (4, 6), (8, 5), (16, 8), (64, 12)])
def test_winding_count_backends_agree(H, W):
    n = 2 * H * W
    trials = 50
    bits = np.stack([tape_bits(55, t, n) for t in range(trials)])
    a = np.zeros(trials, dtype=np.int64)
    b = np.zeros(trials, dtype=np.int64)
    COMPILED.winding_count_batch(bits, H, W, 0, a)
    PYTHON.winding_count_batch(bits, H, W, 0, b)
    assert (a == b).all()


@pytest.mark.skipif(COMPILED is None, reason="compiled extension not built")
def test_mono_reads_backends_agree_large_H():
    # the reads-only kernel carries no origin masks, so H > 64 works
    H, W = 128, 10
    n = 2 * H * W
    trials = 20
    bits = np.stack([tape_bits(77, t, n) for t in range(trials)])
    t0s = np.arange(trials, dtype=np.int64) % W
    outs = []
    for backend in (COMPILED, PYTHON):
        rc = np.zeros(n, dtype=np.int64)
        nr = np.zeros(trials, dtype=np.int64)
        backend.mono_lv_reads_batch(bits, H, W, 0, t0s, rc, nr)
        outs.append((rc, nr))
    assert (outs[0][0] == outs[1][0]).all()
    assert (outs[0][1] == outs[1][1]).all()


def test_value_kernels_reject_huge_H():
    H, W = 128, 4
    bits = np.zeros((1, 2 * H * W), dtype=np.uint8)
    t0s = np.zeros(1, dtype=np.int64)
    rc = np.zeros(2 * H * W, dtype=np.int64)
    masks = np.zeros(1, dtype=np.uint64)
    nr = np.zeros(1, dtype=np.int64)
    with pytest.raises(ValueError):
        kernels.mono_lv_values_batch(bits, H, W, 0, t0s, rc, masks, nr)


def test_backend_name_exposed():
    assert kernels.BACKEND in ("compiled", "python")
    assert rv.BACKEND == kernels.BACKEND


def test_fuzzed_configuration_parity():
    """Random shapes, suitable-set sizes, and sample counts; batch == loop."""
    rng = np.random.default_rng(2718)
    for _ in range(25):
        d = int(rng.integers(1, 6))
        H = 1 << d
        kind = rng.integers(5)
        if kind == 0:
            ev = runners.NonmonotoneLasVegas(
                rv.params_for(H, int(rng.integers(d + 1, d + 5)))
            )
        elif kind == 1:
            ev = runners.NonmonotoneLasVegas(
                rv.params_for(H, int(rng.integers(d + 1, d + 5)), "nonmonotone-symmetric")
            )
        elif kind == 2:
            ev = runners.NonmonotoneMonteCarlo(rv.params_for(H, H), int(rng.integers(1, 6)))
        elif kind == 3:
            spec = MonotoneFunctionSpec(
                rv.params_for(H, int(rng.integers(d, d + 5)), "monotone-balanced-pair"),
                k=int(rng.integers(1, H + 1)),
            )
            ev = runners.MonotoneLasVegas(spec)
        else:
            spec = MonotoneFunctionSpec(
                rv.params_for(H, int(rng.integers(max(d, 2), d + 4)), "monotone-balanced-pair"),
                k=int(rng.integers(1, H + 1)),
            )
            ev = runners.MonotoneMonteCarlo(spec, int(rng.integers(1, 4)))
        trials = 10
        seed = int(rng.integers(1 << 30))
        bits = np.stack([tape_bits(seed, t, ev.n) for t in range(trials)])
        coins = [ev.draw_coins(coin_rng(seed, t)) for t in range(trials)]
        for a, b in zip(_batch_stats(ev, bits, coins), _reference_stats(ev, bits, coins)):
            assert (a == b).all()
