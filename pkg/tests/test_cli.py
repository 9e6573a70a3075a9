import json


from revealment.cli import SCALING_COLUMNS, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_eval_record_fields(capsys):
    code, out = run_cli(
        capsys, "eval", "--ensemble", "nonmonotone", "--d", "2", "--W", "3",
        "--seed", "5",
    )
    assert code == 0
    rec = json.loads(out)
    assert rec["ensemble"] == "nonmonotone"
    assert (rec["H"], rec["W"], rec["n"]) == (4, 3, 12)
    assert rec["algo"] == "lv"
    assert rec["value"] in (0, 1)
    assert 0 <= rec["t0"] < 3
    assert rec["bits_read"] <= 12
    assert rec["seed"] == 5 and rec["trial"] == 0


def test_eval_explicit_hex_deterministic(capsys):
    args = ["eval", "--ensemble", "nonmonotone", "--d", "2", "--W", "3",
            "--input-hex", "fff", "--seed", "0"]
    _, out1 = run_cli(capsys, *args)
    _, out2 = run_cli(capsys, *args)
    assert out1 == out2
    assert json.loads(out1)["value"] == 1  # all-ones input


def test_eval_monotone_pair(capsys):
    code, out = run_cli(
        capsys, "eval", "--ensemble", "monotone-balanced-pair", "--d", "1",
        "--W", "2", "--k", "1", "--input-hex", "ffff",
    )
    assert code == 0
    rec = json.loads(out)
    assert rec["value"] == 1
    assert len(rec["t0"]) == 2


def test_revealment_csv_schema(capsys):
    code, out = run_cli(
        capsys, "revealment", "--ensemble", "nonmonotone", "--d", "2", "--W", "3",
        "--trials", "200", "--seed", "1", "--format", "csv",
    )
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "i,delta_i,se"
    assert len(lines) == 13


def test_revealment_exact_json(capsys):
    code, out = run_cli(
        capsys, "revealment", "--ensemble", "nonmonotone", "--d", "2", "--W", "3",
        "--exact", "--format", "json",
    )
    assert code == 0
    rec = json.loads(out)
    assert rec["mode"] == "exact"
    assert rec["trials"] == 4096 * 3


def test_scaling_csv(capsys):
    code, out = run_cli(
        capsys, "scaling", "--preset", "part1", "--d-min", "3", "--d-max", "4",
        "--trials", "50", "--seed", "2",
    )
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == SCALING_COLUMNS
    assert len(lines) == 3
    row = lines[1].split(",")
    cols = SCALING_COLUMNS.split(",")
    assert row[cols.index("preset")] == "part1"
    assert row[cols.index("W")] == "24"  # W = H*d at d=3
    assert row[cols.index("error_rate")] == ""  # zero-error evaluator


def test_scaling_part2_has_error_rate(capsys):
    code, out = run_cli(
        capsys, "scaling", "--preset", "part2", "--d-min", "3", "--d-max", "3",
        "--trials", "300", "--seed", "2", "--m", "2",
    )
    assert code == 0
    row = out.strip().split("\n")[1].split(",")
    cols = SCALING_COLUMNS.split(",")
    assert row[cols.index("algo")] == "mc"
    assert float(row[cols.index("error_rate")]) >= 0.0


def test_byte_identical_reruns(capsys):
    args = ["scaling", "--preset", "part3", "--d-min", "4", "--d-max", "5",
            "--trials", "60", "--seed", "9", "--k", "2"]
    _, out1 = run_cli(capsys, *args)
    _, out2 = run_cli(capsys, *args)
    assert out1 == out2
    args = ["secondmoment", "--H", "16", "--W", "6", "--trials", "400", "--seed", "3"]
    _, s1 = run_cli(capsys, *args)
    _, s2 = run_cli(capsys, *args)
    assert s1 == s2


def test_secondmoment_json(capsys):
    code, out = run_cli(
        capsys, "secondmoment", "--H", "16", "--W", "6", "--trials", "500",
        "--seed", "0",
    )
    assert code == 0
    rec = json.loads(out)
    assert rec["H"] == 16 and rec["W"] == 6
    assert rec["trials"] == 500
    assert rec["mean_n"] > 0


def test_secondmoment_default_width(capsys):
    code, out = run_cli(capsys, "secondmoment", "--H", "16", "--trials", "200")
    assert json.loads(out)["W"] == 6


def test_splice_json(capsys):
    code, out = run_cli(
        capsys, "splice", "--ensemble", "nonmonotone", "--d", "2", "--W", "3",
        "--trials", "300", "--seed", "4",
    )
    assert code == 0
    rec = json.loads(out)
    assert rec["replay_first_rate"] == 1.0
    assert rec["collision_bound_holds"] is True


def test_verify_passes(capsys):
    code, out = run_cli(capsys, "verify", "--seed", "0")
    assert code == 0
    assert "balanced: 2048/4096, pass" in out
    assert "FAIL" not in out


def test_verify_csv_inequality_table(capsys):
    code, out = run_cli(capsys, "verify", "--format", "csv")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "name,left,right,slack,pass"
    assert len(lines) == 10  # 4 routing + 5 monotone inequality rows
    assert all(ln.endswith(",True") for ln in lines[1:])


def test_invalid_config_is_diagnosed(capsys):
    code = main(["eval", "--ensemble", "monotone", "--d", "2", "--W", "3",
                 "--algo", "mc"])
    err = capsys.readouterr().err
    assert code == 2
    assert "error" in err


def test_out_file(tmp_path, capsys):
    target = tmp_path / "rev.csv"
    code = main(["revealment", "--ensemble", "nonmonotone", "--d", "1", "--W", "2",
                 "--trials", "50", "--seed", "0", "--out", str(target)])
    assert code == 0
    assert target.read_text().startswith("i,delta_i,se")
