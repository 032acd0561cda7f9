import json
import math

import pytest

from pow2digits.cli import (
    EXIT_CONFIG,
    EXIT_INFEASIBLE,
    EXIT_OK,
    EXIT_VERIFY,
    main,
    parse_int_list,
    parse_x_grid,
    read_csv,
)


def run(tmp_path, *args, name="out.csv"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out.read_text() if out.exists() else ""


def test_psi_uniform(tmp_path):
    code, text = run(tmp_path, "psi", "--n", "8", "--uniform")
    assert code == EXIT_OK
    config, rows = read_csv(text)
    assert config["n"] == 8
    assert float(rows[0]["psi"]) == 0.0


def test_psi_zero_weight_below_conjectured(tmp_path):
    code, text = run(tmp_path, "psi", "--n", "12", "--x", "4")
    _, rows = read_csv(text)
    assert float(rows[0]["psi"]) <= math.log(13 / 10)
    assert rows[0]["active_bound"] == "conjectured"


def test_psi_equal_parity_echo(tmp_path):
    code, text = run(tmp_path, "psi", "--n", "6", "--weights", "2,2,1,1,1,1,1,1,1,1", "--exact")
    assert code == EXIT_OK
    _, rows = read_csv(text)
    assert float(rows[0]["equal_parity_error"]) == 0.0
    assert float(rows[0]["log_sum"]) == pytest.approx(5 * math.log(6) + math.log(4), rel=1e-15)


def test_psi_json(tmp_path):
    code, text = run(tmp_path, "psi", "--n", "5", "--x", "2", "--format", "json", name="o.json")
    doc = json.loads(text)
    assert doc["config"]["x"] == 2.0
    assert doc["rows"][0]["n"] == 5


@pytest.mark.parametrize(
    "args",
    [
        ["psi", "--n", "2"],
        ["psi", "--n", "5", "--weights", "1,2,3"],
        ["psi", "--n", "5", "--x", "0.5"],
        ["psi", "--n", "5", "--weights", "0,0,0,0,0,0,0,0,0,0"],
        ["scan", "--x-grid", "0.5,2"],
        ["bogus"],
    ],
)
def test_config_errors(tmp_path, args):
    assert run(tmp_path, *args)[0] == EXIT_CONFIG


def test_psi_infeasible(tmp_path):
    assert run(tmp_path, "psi", "--n", "40", "--x", "2")[0] == EXIT_INFEASIBLE


def test_scan_rows(tmp_path):
    code, text = run(tmp_path, "scan", "--n-list", "10,40", "--x-grid", "1,2,4")
    assert code == EXIT_OK
    _, rows = read_csv(text)
    by_key = {(r["n"], float(r["x"])): r for r in rows}
    assert float(by_key[("10", 1.0)]["r"]) == 0.0
    assert all(float(by_key[("10", x)]["r"]) >= 0 for x in (1.0, 2.0, 4.0))
    assert by_key[("40", 2.0)]["status"] == "infeasible"
    assert "runtime_ms" not in rows[0]


def test_scan_timing_column(tmp_path):
    _, text = run(tmp_path, "scan", "--n", "6", "--x-grid", "1:2:0.5", "--timing")
    _, rows = read_csv(text)
    assert len(rows) == 3 and float(rows[0]["runtime_ms"]) >= 0


def test_scan_csv_round_trip(tmp_path):
    from pow2digits.bounds import r_scan

    _, text = run(tmp_path, "scan", "--n-list", "7,9", "--x-grid", "1.5,3,7.25")
    _, rows = read_csv(text)
    ref = r_scan([7, 9], [1.5, 3, 7.25])
    assert [float(r["r"]) for r in rows] == [row.r for row in ref]
    assert [float(r["log_sum"]) for r in rows] == [row.log_sum for row in ref]


def test_scan_deterministic(tmp_path):
    args = ["scan", "--n-list", "8,12", "--x-grid", "1:6:0.5"]
    _, a = run(tmp_path, *args, name="a.csv")
    _, b = run(tmp_path, *args, name="b.csv")
    assert a == b


def test_envelopes(tmp_path):
    code, text = run(tmp_path, "envelopes", "--x-grid", "1,2,15,100")
    assert code == EXIT_OK
    lines = text.splitlines()
    lo = float(next(l for l in lines if l.startswith("# interval_A_lo")).split(": ")[1])
    hi = float(next(l for l in lines if l.startswith("# interval_A_hi")).split(": ")[1])
    assert 1 < lo < hi < 1e4
    _, rows = read_csv(text)
    assert float(rows[0]["f1"]) == 0.0 and float(rows[0]["f2"]) == 0.0
    assert rows[2]["f3_le_f2"] == "true"


def test_verify_passes(tmp_path):
    code, text = run(tmp_path, "verify", "--trials", "3")
    assert code == EXIT_OK
    _, rows = read_csv(text)
    assert all(r["passed"] == "true" for r in rows)


def test_verify_fault_injection(tmp_path):
    code, text = run(tmp_path, "verify", "--trials", "2", "--inject-bad-delta")
    assert code == EXIT_VERIFY
    _, rows = read_csv(text)
    bad = [r for r in rows if r["passed"] == "false"]
    assert [r["check"] for r in bad] == ["congruence_solutions"]
    witness = json.loads(bad[0]["witness"])
    assert witness["m"] == 2 and witness["returned"] != witness["exhaustive"]


def test_rate(tmp_path):
    code, text = run(tmp_path, "rate", "--n-list", "6")
    assert code == EXIT_OK
    a0 = float(next(l for l in text.splitlines() if l.startswith("# a0:")).split(": ")[1])
    assert abs(a0 - 0.8649) <= 5e-4
    _, rows = read_csv(text)
    rate_rows = {float(r["a"]): float(r["value"]) for r in rows if r["kind"] == "rate"}
    assert rate_rows[0.1] == 0.0
    (ch,) = [r for r in rows if r["kind"] == "chernoff"]
    count = int(ch["oracle_count"])
    assert count == 0 or float(ch["value"]) >= math.log(count)


def test_oracle_command(tmp_path):
    code, text = run(tmp_path, "oracle", "--n", "4")
    assert code == EXIT_OK
    assert "# omega_size: 500" in text
    assert "# digit_sum_of_2^n: 7" in text
    assert run(tmp_path, "oracle", "--n", "12")[0] == EXIT_CONFIG


def test_parsers():
    assert parse_int_list("4-8") == [4, 5, 6, 7, 8]
    assert parse_int_list("10,16,20") == [10, 16, 20]
    assert parse_x_grid("1:2:0.25") == [1.0, 1.25, 1.5, 1.75, 2.0]
    assert parse_x_grid("1,3") == [1.0, 3.0]


def test_stdout_output(capsys):
    assert main(["psi", "--n", "4"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("# config: ")
