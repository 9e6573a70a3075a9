"""Experiment runner CLI.

Subcommands: eval (single input), revealment (statistical or exact read
frequencies), scaling (sweep the size parameter of a preset), verify
(balance, exactness, monotonicity, inequality suite), secondmoment, and
splice.  Given the same configuration and seed the output is
byte-identical between runs.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import analysis, monotone, runners
from .butterfly import ButterflyParams, params_for
from .monotone import MonotoneFunctionSpec, default_width
from .tape import InputTape, bits_from_hex, coin_rng, tape_bits

PRESETS = {
    # preset -> (ensemble, algo, width rule)
    "part1": ("nonmonotone", "lv", lambda H, d: H * d),
    "part2": ("nonmonotone", "mc", lambda H, d: H),
    "part3": ("monotone-balanced-pair", "lv", lambda H, d: default_width(H)),
    "part4": ("monotone-balanced-pair", "mc", lambda H, d: default_width(H)),
}

SCALING_COLUMNS = (
    "preset,ensemble,H,W,n,algo,m,k,trials,seed,"
    "delta_max,delta_max_se,mean_read_fraction,error_rate,error_rate_se"
)


@dataclass
class ResolvedConfig:
    preset: str
    params: ButterflyParams
    algo: str
    m: Optional[int]
    k: Optional[int]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _resolve(preset: str, d: int, m: Optional[int], k, seed: int) -> ResolvedConfig:
    ensemble, algo, width = PRESETS[preset]
    H = 1 << d
    params = ButterflyParams(d=d, W=width(H, d), ensemble=ensemble)
    if algo == "mc" and m is None:
        m = 4
    if ensemble == "monotone-balanced-pair":
        if k == "auto" or k is None:
            if H <= 64:
                k = monotone.calibrate_k(params, trials=20000, seed=seed ^ 0x5EED).k
            else:
                k = 1  # value layer is capped at H=64; read statistics don't use k
        else:
            k = int(k)
    else:
        k = None
    return ResolvedConfig(preset=preset, params=params, algo=algo, m=m, k=k)


def _make_evaluator(params: ButterflyParams, algo: str, m, k):
    if params.ensemble in ("nonmonotone", "nonmonotone-symmetric"):
        if algo == "lv":
            return runners.NonmonotoneLasVegas(params)
        return runners.NonmonotoneMonteCarlo(params, m)
    if params.ensemble == "monotone":
        if algo != "lv":
            raise ValueError("single-experiment layout supports lv only")
        return runners.MonotoneSingleLasVegas(params, k=k or 1)
    spec = MonotoneFunctionSpec(params, k=k or 1)
    if algo == "lv":
        return runners.MonotoneLasVegas(spec)
    return runners.MonotoneMonteCarlo(spec, m)


def _write(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _params_from_args(args) -> ButterflyParams:
    if args.H is not None:
        return params_for(args.H, args.W, args.ensemble)
    return ButterflyParams(d=args.d, W=args.W, ensemble=args.ensemble)


def _add_shape_flags(p, need_w=True):
    p.add_argument("--ensemble", default="nonmonotone",
                   choices=["nonmonotone", "nonmonotone-symmetric",
                            "monotone", "monotone-balanced-pair"])
    p.add_argument("--d", type=int, default=2, help="H = 2^d")
    p.add_argument("--H", type=int, default=None, help="overrides --d")
    if need_w:
        p.add_argument("--W", type=int, required=True, help="time slices")


def cmd_eval(args) -> int:
    params = _params_from_args(args)
    ev = _make_evaluator(params, args.algo, args.m, args.k)
    if args.input_hex is not None:
        bits = bits_from_hex(args.input_hex, params.n)
    else:
        bits = tape_bits(args.seed, args.trial, params.n)
    tape = InputTape(bits)
    coins = ev.draw_coins(coin_rng(args.seed, args.trial))
    out = ev.run(tape, coins)
    t0 = out.t0 if out.t0 is not None else (
        list(out.t0_pair) if out.t0_pair is not None else None
    )
    record = {
        "ensemble": params.ensemble,
        "H": params.H,
        "W": params.W,
        "n": params.n,
        "algo": args.algo,
        "m": args.m if args.algo == "mc" else None,
        "k": args.k,
        "t0": t0,
        "value": 1 if out.value == 1 else 0,
        "bits_read": out.bits_read,
        "seed": args.seed,
        "trial": args.trial,
    }
    _write(json.dumps(record, sort_keys=True) + "\n", args.out)
    return 0


def cmd_revealment(args) -> int:
    params = _params_from_args(args)
    ev = _make_evaluator(params, args.algo, args.m, args.k)
    if args.exact:
        report = analysis.exact_revealment(ev)
    else:
        report = analysis.estimate_revealment(ev, args.trials, args.seed)
    if args.format == "csv":
        lines = ["i,delta_i,se"]
        lines += [f"{i},{_fmt(d)},{_fmt(s)}" for i, d, s in report.csv_rows()]
        _write("\n".join(lines) + "\n", args.out)
    else:
        _write(
            json.dumps(
                {
                    "n": report.n,
                    "trials": report.trials,
                    "mode": report.mode,
                    "delta_max": report.delta_max,
                    "delta_max_se": report.delta_max_se,
                    "mean_read_fraction": report.mean_read_fraction,
                    "delta_i": [float(x) for x in report.delta_i],
                    "se_i": [float(x) for x in report.se_i],
                },
                sort_keys=True,
            )
            + "\n",
            args.out,
        )
    return 0


def scaling_rows(preset, d_values, trials, seed, m=None, k="auto"):
    """One result row per size; shared by the CLI and the test suite."""
    rows = []
    for d in d_values:
        cfg = _resolve(preset, d, m, k, seed)
        params = cfg.params
        if cfg.algo == "lv":
            stats = runners.lv_read_stats(params, trials, seed)
            err = se_err = None
            delta = stats.delta_i
        else:
            lv = _make_evaluator(params, "lv", None, cfg.k)
            mc = _make_evaluator(params, "mc", cfg.m, cfg.k)
            exp = runners.error_experiment(mc, lv, trials, seed)
            stats = exp.mc
            err, se_err = exp.error_rate, exp.error_se
            delta = stats.delta_i
        dmax = float(delta.max())
        rows.append(
            {
                "preset": preset,
                "ensemble": params.ensemble,
                "H": params.H,
                "W": params.W,
                "n": params.n,
                "algo": cfg.algo,
                "m": cfg.m,
                "k": cfg.k,
                "trials": trials,
                "seed": seed,
                "delta_max": dmax,
                "delta_max_se": float(np.sqrt(max(dmax * (1 - dmax), 1e-12) / trials)),
                "mean_read_fraction": stats.mean_read_fraction,
                "error_rate": err,
                "error_rate_se": se_err,
            }
        )
    return rows


def cmd_scaling(args) -> int:
    d_values = list(range(args.d_min, args.d_max + 1))
    rows = scaling_rows(args.preset, d_values, args.trials, args.seed,
                        m=args.m, k=args.k)
    if args.format == "csv":
        lines = [SCALING_COLUMNS]
        for r in rows:
            lines.append(",".join(_fmt(r[c]) for c in SCALING_COLUMNS.split(",")))
        _write("\n".join(lines) + "\n", args.out)
    else:
        _write(json.dumps(rows, sort_keys=True) + "\n", args.out)
    return 0


def verify_checks(seed: int = 0, collect_tables: Optional[list] = None):
    """The desk-scale verification suite; yields (name, detail, passed)."""
    # routing ensemble at H=4, W=3: exact balance, exactness, inequalities
    p43 = params_for(4, 3, "nonmonotone")
    lv43 = runners.NonmonotoneLasVegas(p43)
    table = analysis.truth_table(lv43, coins=(0,))
    half = 1 << (p43.n - 1)
    yield ("balanced", f"{table.ones}/{1 << p43.n}", table.ones == half)
    en = runners.run_enumeration(lv43)
    exact_ok = bool((en.values == table.values[None, :]).all())
    yield ("las-vegas-exact", f"{len(en.coins)} start slices", exact_ok)
    rev = analysis.exact_revealment(lv43)
    ineq = analysis.check_inequalities(analysis.fourier(table), rev)
    if collect_tables is not None:
        collect_tables.append(ineq)
    yield ("inequalities-routing", f"{len(ineq.records)} checks", ineq.all_pass)

    # symmetric variant at H=2, W=2: exact balance
    p22s = params_for(2, 2, "nonmonotone-symmetric")
    table_s = analysis.truth_table(runners.NonmonotoneLasVegas(p22s), coins=(0,))
    yield ("balanced-symmetric", f"{table_s.ones}/{1 << p22s.n}",
           table_s.ones == 1 << (p22s.n - 1))

    # balanced pair at H=2, W=2, k=1: monotone, exact, inequalities
    spec = MonotoneFunctionSpec(params_for(2, 2, "monotone-balanced-pair"), k=1)
    lvm = runners.MonotoneLasVegas(spec)
    table_m = analysis.truth_table(lvm, coins=(0, 0))
    yield ("monotone", f"n={spec.params.n} exhaustive flips",
           analysis.is_monotone(table_m))
    en_m = runners.run_enumeration(lvm)
    yield ("las-vegas-exact-monotone", f"{len(en_m.coins)} slice pairs",
           bool((en_m.values == table_m.values[None, :]).all()))
    rev_m = analysis.exact_revealment(lvm)
    ineq_m = analysis.check_inequalities(
        analysis.fourier(table_m), rev_m, monotone=True
    )
    if collect_tables is not None:
        collect_tables.append(ineq_m)
    yield ("inequalities-monotone", f"{len(ineq_m.records)} checks", ineq_m.all_pass)


def cmd_verify(args) -> int:
    tables: list = []
    results = list(verify_checks(args.seed, collect_tables=tables))
    if args.format == "json":
        _write(
            json.dumps(
                [{"name": n, "detail": d, "pass": p} for n, d, p in results],
                sort_keys=True,
            )
            + "\n",
            args.out,
        )
    elif args.format == "csv":
        # the inequality tables with one row per check
        body = "".join(t.to_csv() for t in tables)
        header, *rest = body.split("\n")
        dedup = [header] + [ln for ln in rest if ln and ln != header]
        _write("\n".join(dedup) + "\n", args.out)
    else:
        lines = [
            f"{name}: {detail}, {'pass' if ok else 'FAIL'}"
            for name, detail, ok in results
        ]
        _write("\n".join(lines) + "\n", args.out)
    return 0 if all(ok for _, _, ok in results) else 1


def cmd_secondmoment(args) -> int:
    W = args.W if args.W is not None else default_width(args.H or (1 << args.d))
    H = args.H or (1 << args.d)
    report = monotone.second_moment_experiment(H, W, args.trials, args.seed)
    _write(report.to_json() + "\n", args.out)
    return 0


def cmd_splice(args) -> int:
    params = _params_from_args(args)
    ev = _make_evaluator(params, args.algo, args.m, args.k)
    report = analysis.splice_experiment(ev, args.trials, args.seed)
    _write(report.to_json() + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="revealment",
        description="Evaluators and measurement harness for low-revealment "
        "Boolean functions on the wrapped butterfly.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate one input, print a JSON record")
    _add_shape_flags(p)
    p.add_argument("--algo", choices=["lv", "mc"], default="lv")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--input-hex", default=None,
                   help="explicit input, LSB = position 0")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("revealment", help="per-bit read frequencies")
    _add_shape_flags(p)
    p.add_argument("--algo", choices=["lv", "mc"], default="lv")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact", action="store_true",
                   help="enumerate all (input, slice) pairs instead of sampling")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_revealment)

    p = sub.add_parser("scaling", help="sweep d for one preset")
    p.add_argument("--preset", choices=sorted(PRESETS), required=True)
    p.add_argument("--d-min", type=int, default=4)
    p.add_argument("--d-max", type=int, default=8)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--k", default="auto")
    p.add_argument("--trials", type=int, default=400)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_scaling)

    p = sub.add_parser("verify", help="balance, exactness, monotonicity, "
                                      "and inequality checks at desk scale")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["text", "json", "csv"], default="text")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("secondmoment", help="winding-cycle count moments")
    p.add_argument("--d", type=int, default=6)
    p.add_argument("--H", type=int, default=None)
    p.add_argument("--W", type=int, default=None,
                   help="defaults to floor(c* sqrt(2H))")
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_secondmoment)

    p = sub.add_parser("splice", help="two-run collision experiment")
    _add_shape_flags(p)
    p.add_argument("--algo", choices=["lv"], default="lv")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_splice)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, RuntimeError) as exc:
        print(f"revealment: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
