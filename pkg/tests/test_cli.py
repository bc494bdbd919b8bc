import json

import pytest

from catbox.cli import JSON_SCHEMA, run_cli


def run(capsys, *argv):
    code = run_cli(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval(capsys):
    code, out, _ = run(capsys, "eval", "line:4", "2332")
    assert code == 0 and "duration = 39/16 (2.43750)" in out
    code, out, _ = run(capsys, "eval", "line:7:exits", "1661(2266)", "--json")
    d = json.loads(out)
    assert d["schema"] == JSON_SCHEMA and d["escape_rate"] == "183/784"


def test_eval_float_and_certified(capsys):
    code, out, _ = run(capsys, "eval", "line:6:exits", "15261(2552)", "--float")
    assert code == 0 and "escape rate" in out
    code, out, _ = run(capsys, "eval", "line:8", "preset:s8_fast", "--certified")
    assert code == 0 and "4.7495" in out and "bound" in out


def test_formula(capsys):
    assert run(capsys, "formula", "e2d_avg", "7")[1].strip() == "1084/329 (3.29483)"
    code, out, _ = run(capsys, "formula", "random_open", "3", "--json")
    assert json.loads(out)["escape_rate"] == "8/21"
    assert abs(float(run(capsys, "formula", "e_sin", "11")[1]) - 29.35) < 5e-3


def test_tables(capsys):
    code, out, _ = run(capsys, "tables", "T2", "T10")
    assert code == 0 and "608/141" in out and "1084/329" in out
    assert "34/34 cells reproduced" in out
    code, out, _ = run(capsys, "tables", "t8", "--json")
    d = json.loads(out)
    assert code == 0 and d["ok"] and any(c["expected"] == "10771/57360" for c in d["cells"])


def test_tables_mismatch_exit_code(capsys):
    code, out, _ = run(capsys, "tables", "T4")
    bad = [line for line in out.splitlines() if line.startswith("mismatch:")]
    assert code == (1 if bad else 0)


def test_search(capsys):
    code, out, _ = run(capsys, "search", "line:3:exits", "--maxdepth", "6")
    assert code == 0 and "strategy = 22" in out and "1/3" in out
    code, out, _ = run(capsys, "search", "ring:6", "--maxdepth", "14", "--all-optima-within", "1e-9",
                       "--json")
    d = json.loads(out)
    assert d["value"] == "608/141" and len(d["optima"]) == 3


def test_prove(capsys):
    code, out, _ = run(capsys, "prove", "line:5", "(2442)", "--horizon", "5")
    assert code == 0 and "status: certified" in out


def test_simulate(capsys, tmp_path):
    csv = tmp_path / "h.csv"
    code, out, _ = run(capsys, "simulate", "grid:2x2:exits", "(1)", "--trials", "50000", "--check",
                       "--csv", str(csv))
    assert code == 0 and "crosscheck pass" in out
    assert csv.read_text().startswith("duration,count\n")
    a = run(capsys, "simulate", "ring:3", "(1)", "--trials", "1000", "--json", "--seed", "4")[1]
    b = run(capsys, "simulate", "ring:3", "(1)", "--trials", "1000", "--json", "--seed", "4")[1]
    assert a == b


def test_trace(capsys):
    code, out, _ = run(capsys, "trace", "line:4:exits", "(14414114)", "--steps", "3", "--json")
    rows = json.loads(out)["trace"]
    assert len(rows) == 3 and rows[-1]["inbox"] == ["3/32", "1/16", "3/32", "1/32"]


@pytest.mark.parametrize("argv", [
    ["eval", "line:4", "25"], ["eval", "hex:4", "1"], ["eval", "line:4", "23"],
    ["formula", "nope", "1"], ["formula", "e2d", "1"], ["formula", "e_save", "x"],
    ["formula", "e_save", "2"], ["tables", "T12"], ["search", "line:4", "--objective", "escape"],
    ["search", "line:4", "--maxdepth", "0"], ["prove", "line:4", "2332"], [],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err
