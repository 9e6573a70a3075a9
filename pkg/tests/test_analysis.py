import json
from fractions import Fraction

import numpy as np
import pytest

import revealment as rv
from revealment import analysis, runners


class DictatorProbe:
    """Debug evaluator: reads bit 0 and returns it; no coins."""

    algo = "lv"
    n = 6

    def draw_coins(self, rng):
        return ()

    def enumerate_coins(self):
        return [()]

    def run(self, tape, coins):
        v = 1 if tape.read(0) else -1
        return rv.EvalOutcome(value=v, tape=tape)

    batch = runners._Evaluator.batch


class ReadAllProbe(DictatorProbe):
    """Debug evaluator that reads every bit; output is the parity."""

    def run(self, tape, coins):
        acc = 0
        for i in range(self.n):
            acc ^= tape.read(i)
        return rv.EvalOutcome(value=1 if acc else -1, tape=tape)


def test_estimate_revealment_dictator():
    rep = analysis.estimate_revealment(DictatorProbe(), trials=64, seed=0)
    assert rep.delta_i[0] == 1.0
    assert (rep.delta_i[1:] == 0).all()
    assert rep.delta_max == 1.0
    assert rep.mode == "statistical"


def test_exact_revealment_read_all():
    rep = analysis.exact_revealment(ReadAllProbe())
    assert (rep.delta_i == 1.0).all()
    assert (rep.se_i == 0).all()
    assert rep.mode == "exact"
    assert rep.trials == 64  # 2^6 inputs x 1 coin assignment


def test_statistical_matches_exact(nonmono43):
    params, lv, table, rev = nonmono43
    est = analysis.estimate_revealment(lv, trials=20000, seed=12)
    assert (np.abs(est.delta_i - rev.delta_i) <= 4 * np.maximum(est.se_i, 1e-4)).all()
    assert abs(est.mean_read_fraction - rev.mean_read_fraction) < 0.02


def test_statistical_convergence_across_runs(nonmono43):
    # over repeated estimation runs, nearly all land within 4 SE of exact
    params, lv, table, rev = nonmono43
    hits = 0
    runs = 10
    for s in range(runs):
        est = analysis.estimate_revealment(lv, trials=4000, seed=100 + s)
        if (np.abs(est.delta_i - rev.delta_i) <= 4 * np.maximum(est.se_i, 1e-4)).all():
            hits += 1
    assert hits >= 0.95 * runs


def test_symmetric_read_frequencies_uniform():
    params = rv.params_for(2, 3, "nonmonotone-symmetric")
    lv = runners.NonmonotoneLasVegas(params)
    rep = analysis.estimate_revealment(lv, trials=20000, seed=3)
    common = rep.delta_i.mean()
    assert (np.abs(rep.delta_i - common) <= 4 * np.maximum(rep.se_i, 1e-4)).all()


def test_truth_table_guards():
    with pytest.raises(ValueError):
        analysis.TruthTable(n=3, values=np.zeros(8, dtype=np.int8))
    with pytest.raises(ValueError):
        analysis.TruthTable(n=2, values=np.ones(5, dtype=np.int8))
    with pytest.raises(ValueError):
        analysis.TruthTable(n=25, values=np.ones(4, dtype=np.int8))


def test_fourier_balanced_function(nonmono43):
    _, _, table, _ = nonmono43
    ft = analysis.fourier(table)
    assert ft.mean == 0.0
    assert ft.variance == 1.0
    assert ft.balance_p == 0.5


def test_fourier_parity_function():
    table = analysis.truth_table_from_callable(
        lambda tape: 1 if (sum(tape.read(i) for i in range(5)) % 2) else -1, n=5
    )
    ft = analysis.fourier(table)
    assert (ft.level1 == 0).all()
    assert (ft.influences == 1).all()
    assert ft.variance == 1.0


def test_fourier_dictator_function():
    table = analysis.truth_table_from_callable(
        lambda tape: 1 if tape.read(0) else -1, n=4
    )
    ft = analysis.fourier(table)
    assert ft.level1[0] == 1.0
    assert (ft.level1[1:] == 0).all()
    assert ft.influences[0] == 1.0


def test_fourier_round_trip(mono22):
    _, _, table, _ = mono22
    ft = analysis.fourier(table)
    v = table.values.astype(np.float64)
    assert abs(ft.mean - v.mean()) < 1e-12
    assert abs(ft.variance - (1 - v.mean() ** 2)) < 1e-12
    # Var/4 = p - p^2 on the 0/1 scale
    p = ft.balance_p
    assert abs(ft.variance / 4 - (p - p * p)) < 1e-12


def test_influence_equals_level1_for_monotone(mono22):
    _, _, table, _ = mono22
    assert analysis.is_monotone(table)
    ft = analysis.fourier(table)
    assert np.abs(ft.influences - ft.level1).max() < 1e-12


def test_monotonicity_violations_detects():
    # parity is as non-monotone as it gets
    table = analysis.truth_table_from_callable(
        lambda tape: 1 if (sum(tape.read(i) for i in range(3)) % 2) else -1, n=3
    )
    assert analysis.monotonicity_violations(table) > 0
    assert not analysis.is_monotone(table)


def test_check_inequalities_exact(nonmono43):
    _, _, table, rev = nonmono43
    rep = analysis.check_inequalities(analysis.fourier(table), rev)
    assert rep.all_pass
    names = [r.name for r in rep.records]
    assert "variance-vs-weighted-influence" in names
    assert "zero-error-delta-floor" in names
    parsed = json.loads(rep.to_json())
    assert all(row["pass"] for row in parsed)


def test_check_inequalities_read_everything():
    # delta_i = 1 turns the weighted-influence bound into the plain
    # variance-vs-total-influence inequality, true for every function
    ev = ReadAllProbe()
    rev = analysis.exact_revealment(ev)
    table = analysis.truth_table(ev, coins=())
    rep = analysis.check_inequalities(analysis.fourier(table), rev)
    assert rep.all_pass


def test_check_inequalities_shape_mismatch(nonmono43):
    _, _, table, _ = nonmono43
    other = analysis.exact_revealment(ReadAllProbe())
    with pytest.raises(ValueError):
        analysis.check_inequalities(analysis.fourier(table), other)


def test_exact_fraction_checks(nonmono43, mono22):
    _, _, table43, rev43 = nonmono43
    assert analysis.zero_error_floor_exact(table43, rev43)
    assert rev43.delta_max_fraction() == Fraction(
        int(rev43.read_counts.max()), 4096 * 3
    )
    spec, _, table22, rev22 = mono22
    assert analysis.monotone_ceiling_exact(table22, rev22)


def test_delta_fraction_requires_exact_mode():
    rep = analysis.estimate_revealment(DictatorProbe(), trials=8, seed=0)
    with pytest.raises(ValueError):
        rep.delta_max_fraction()


def test_enumeration_guard(monkeypatch):
    monkeypatch.setenv("REVEALMENT_MAX_ENUM", "100")
    with pytest.raises(ValueError):
        analysis.exact_revealment(runners.NonmonotoneLasVegas(rv.params_for(4, 3)))


def test_enumeration_rejects_sampled_coins():
    mc = runners.NonmonotoneMonteCarlo(rv.params_for(4, 4), 2)
    with pytest.raises(ValueError):
        analysis.exact_revealment(mc)


def test_splice_experiment_small():
    ev = runners.NonmonotoneLasVegas(rv.params_for(4, 3))
    rep = analysis.splice_experiment(ev, trials=400, seed=5)
    assert rep.replay_first_rate == 1.0
    assert rep.replay_second_rate == 1.0
    assert rep.collision_bound_holds
    # E[N] and the sum of squared read frequencies estimate the same thing
    assert abs(rep.mean_n - rep.sum_delta_sq) < 0.4
    parsed = json.loads(rep.to_json())
    assert parsed["trials"] == 400


def test_splice_uses_independent_inputs():
    ev = runners.NonmonotoneLasVegas(rv.params_for(2, 2))
    rep = analysis.splice_experiment(ev, trials=300, seed=1)
    assert 0 < rep.agreement_rate <= 1.0


def test_revealment_report_csv(nonmono43):
    _, _, _, rev = nonmono43
    rows = list(rev.csv_rows())
    assert len(rows) == 12
    assert rows[0][0] == 0
    assert all(se == 0.0 for _, _, se in rows)
