import io
import json
import math

import pytest

from dimwitness.cli import EXIT_NUMERIC, EXIT_OK, EXIT_PARSE, EXIT_USAGE, run_command
from dimwitness.families import bgamma_matrix
from dimwitness.serialization import (
    MatrixParseError,
    format_matrix,
    parse_matrix_json,
    parse_matrix_text,
)


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def chsh_file(tmp_path):
    p = tmp_path / "chsh.txt"
    p.write_text("# CHSH\n2 2\n1 1\n1 -1\n")
    return str(p)


def test_parse_text_and_json_round_trip():
    expr = bgamma_matrix(3, 1.25)
    assert parse_matrix_text(format_matrix(expr)) == expr
    assert parse_matrix_json(format_matrix(expr, "json")) == expr


def test_parse_full_precision_round_trip():
    expr = parse_matrix_text("1 2\n0.1 0.30000000000000004\n")
    assert parse_matrix_text(format_matrix(expr)) == expr


@pytest.mark.parametrize("text, line, column", [
    ("2 2\n1 1\n1 x\n", 3, 3),
    ("2 2\n1 1\n1\n", 3, 2),
    ("2 2\n1 1 1\n1 1\n", 2, 5),
    ("2 2\n1 1\n", 2, None),
    ("2\n1 1\n", 1, 1),
    ("2 2\n1 nan\n1 1\n", 2, 3),
])
def test_parse_errors_carry_location(text, line, column):
    with pytest.raises(MatrixParseError) as info:
        parse_matrix_text(text)
    assert info.value.line == line
    assert info.value.column == column


def test_parse_json_errors():
    for bad in ('{"rows": 1}', '{"rows": 1, "cols": 1, "entries": [[true]]}',
                '{"rows": 2, "cols": 1, "entries": [[1]]}', "{oops"):
        with pytest.raises(MatrixParseError):
            parse_matrix_json(bad)


def test_analyze_chsh_json(chsh_file):
    code, out, _ = run("analyze", chsh_file, "--restarts", "5", "--jobs", "1")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert set(doc) == {"tool_version", "command", "seed", "config", "payload", "timing"}
    prof = doc["payload"]["profile"]
    assert prof[0]["value"] == 2.0 and prof[0]["source"] == "exact"
    assert prof[1]["value"] == pytest.approx(2 * math.sqrt(2), abs=1e-9)
    assert doc["payload"]["witness_dim"] == 1
    assert "jobs" not in doc["config"]


def test_analyze_csv_and_stdin(monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("2 2\n1 1\n1 -1\n"))
    code, out, _ = run("analyze", "-", "--format", "csv", "--restarts", "3")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "n,value,converged"
    assert lines[1] == "1,2.0,true"


def test_analyze_is_independent_of_jobs(chsh_file):
    a = json.loads(run("analyze", chsh_file, "--restarts", "8", "--jobs", "1")[1])
    b = json.loads(run("analyze", chsh_file, "--restarts", "8", "--jobs", "3")[1])
    assert a["payload"] == b["payload"]


def test_parse_error_exit_code(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("2 2\n1 1\n1 q\n")
    code, _, err = run("analyze", str(p))
    assert code == EXIT_PARSE
    assert "line 3, column 3" in err
    assert run("analyze", str(tmp_path / "missing.txt"))[0] == EXIT_PARSE


def test_usage_errors():
    assert run()[0] == EXIT_USAGE
    assert run("family", "bgamma", "--mb", "3")[0] == EXIT_USAGE
    assert run("family", "bgamma", "--mb", "3", "--gamma", "-1")[0] == EXIT_USAGE
    assert run("search", "--ma", "2", "--mb", "2", "--alphabet", "0,1")[0] == EXIT_USAGE


def test_unconverged_exit_code(chsh_file):
    code, out, err = run("analyze", chsh_file, "--max-sweeps", "1", "--conv-tol", "1e-300",
                         "--restarts", "2")
    assert code == EXIT_NUMERIC
    assert json.loads(out)["payload"]["profile"]
    assert "budget" in err


def test_family_report_and_matrix():
    code, out, _ = run("family", "bgamma", "--mb", "3", "--gamma", "1")
    payload = json.loads(out)["payload"]
    assert code == EXIT_OK
    assert payload["T_max"] == pytest.approx(6.0)
    assert payload["x_star"] == pytest.approx(-0.125)
    assert payload["classical"]["value"] == pytest.approx(5.0)
    code, out, _ = run("family", "bgamma", "--mb", "3", "--gamma", "1", "--emit", "matrix")
    assert parse_matrix_text(out) == bgamma_matrix(3, 1.0)
    code, out, _ = run("family", "zn", "--mb", "3", "--matrix-format", "json")
    assert json.loads(out)["rows"] == 3
    assert run("family", "chsh")[1].splitlines()[0] == "2 2"


def test_sphere_table():
    code, out, _ = run("sphere", "table", "--nmax", "3")
    rows = json.loads(out)["payload"]["rows"]
    assert code == EXIT_OK
    assert rows[1]["ratio"] == pytest.approx(math.pi**2 / 8, abs=1e-12)
    code, out, _ = run("sphere", "table", "--nmax", "4", "--m", "3")
    rows = json.loads(out)["payload"]["rows"]
    assert rows[0]["T_n"] == pytest.approx(0.75)
    assert rows[3]["T_n"] == 1.0


def test_sphere_discretize_small():
    code, out, _ = run("sphere", "discretize", "--m", "3", "--points", "40", "--nmax", "2",
                       "--restarts", "3")
    rows = json.loads(out)["payload"]["rows"]
    assert code == EXIT_OK
    assert [r["n"] for r in rows] == [1, 2]
    assert all("analytic_strategy_value" in r for r in rows)


def test_realize(tmp_path):
    p = tmp_path / "b.txt"
    p.write_text(format_matrix(bgamma_matrix(3, 1.0)))
    code, out, _ = run("realize", str(p), "--n", "3", "--restarts", "10", "--dump")
    payload = json.loads(out)["payload"]
    assert code == EXIT_OK
    assert payload["local_dim"] == 2
    assert payload["realized_value"] == pytest.approx(6.0, abs=1e-9)
    assert payload["passed"]
    assert "realization" in payload


def test_search_writes_jsonl(tmp_path):
    out_file = tmp_path / "scan.jsonl"
    code, out, _ = run("search", "--ma", "2", "--mb", "2", "--flag-gap", "1,2",
                       "--restarts", "3", "--out", str(out_file), "--jobs", "1")
    payload = json.loads(out)["payload"]
    assert code == EXIT_OK
    assert payload["classes"] == 4
    assert len(out_file.read_text().splitlines()) == payload["scanned"] == 4
    assert len(payload["hits"]) == 1


def test_search_keep_trivial_skips_zero_class():
    code, out, _ = run("search", "--ma", "1", "--mb", "1", "--keep-trivial", "--flag-gap", "1,2",
                       "--restarts", "2", "--jobs", "1")
    payload = json.loads(out)["payload"]
    assert code == EXIT_OK
    assert payload["classes"] == 2 and payload["scanned"] == 1
