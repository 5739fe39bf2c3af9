import csv
import io
import json

import pytest

from riccati_pade.cli import (
    CSV_COLUMNS,
    EXIT_NOT_STARTED,
    EXIT_OK,
    EXIT_USAGE,
    OutputRecord,
    main,
)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def csv_records(text):
    return [OutputRecord.from_csv_row(r) for r in csv.DictReader(io.StringIO(text))]


def test_single_row_critical(capsys, tables):
    code, out = run(["critical", "--k", "0", "--dmax", "2", "--format", "csv"], capsys)
    assert code == EXIT_OK
    recs = csv_records(out)
    assert [(r.D, r.d) for r in recs] == [(2, 0), (2, 1)]
    assert [r.value for r in recs] == tables["g0"]["rows"]["2"]


def test_dmax_below_minimum_is_usage_error(capsys):
    assert main(["critical", "--k", "0", "--dmax", "1"]) == EXIT_USAGE


def test_bad_arguments_are_usage_errors(capsys):
    assert main(["critical", "--k", "x"]) == EXIT_USAGE
    assert main(["eigen", "--potential", "abc"]) == EXIT_USAGE
    assert main(["eigen", "--k", "1", "--parity", "even"]) == EXIT_USAGE


def test_not_started_exit_code(capsys):
    # the upper bound of g_2 appears only from D = 5
    code, out = run(["critical", "--k", "2", "--dmax", "3", "--format", "csv"], capsys)
    assert code == EXIT_NOT_STARTED


def test_harmonic_eigen(capsys):
    code, out = run(["eigen", "--potential", "1", "--parity", "even", "--dmax", "3",
                     "--format", "csv", "--digits", "10"], capsys)
    assert code == EXIT_OK
    recs = csv_records(out)
    assert recs and all(r.value == "1.000000000" for r in recs)


def test_csv_round_trip(capsys):
    code, out = run(["critical", "--k", "1", "--dmax", "4", "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert tuple(rows[0].keys()) == CSV_COLUMNS
    for row in rows:
        rec = OutputRecord.from_csv_row(row)
        assert dict(zip(CSV_COLUMNS, rec.csv_row())) == row


def test_json_lines(capsys):
    code, out = run(["critical", "--k", "0", "--dmax", "3", "--format", "json-lines"], capsys)
    objs = [json.loads(line) for line in out.splitlines()]
    assert len(objs) == 4 and {o["d"] for o in objs} == {0, 1}


def test_table_format_and_truncation(capsys, tables):
    code, out = run(["critical", "--k", "0", "--dmax", "4", "--rounding", "truncate"], capsys)
    assert code == EXIT_OK
    line = [ln for ln in out.splitlines() if ln.split() and ln.split()[0] == "3"][0]
    # truncated cells are prefixes of the rounded table cells up to the last digit
    for cell, ref in zip(line.split()[1:], tables["g0"]["rows"]["3"]):
        assert cell[:-1] == ref[:-1]


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"dmax": 3, "format": "csv", "digits": 12}))
    code, out = run(["critical", "--k", "0", "--config", str(cfg)], capsys)
    recs = csv_records(out)
    assert max(r.D for r in recs) == 3
    assert recs[0].value == "0.363696483727"
    code, out = run(["critical", "--k", "0", "--config", str(cfg), "--dmax", "2"], capsys)
    assert max(r.D for r in csv_records(out)) == 2


def test_out_file(tmp_path, capsys):
    target = tmp_path / "g0.csv"
    assert main(["critical", "--k", "0", "--dmax", "3", "--format", "csv", "--out", str(target)]) == 0
    assert len(csv_records(target.read_text())) == 4


def test_deterministic_output(capsys):
    argv = ["critical", "--k", "0", "--dmax", "6", "--format", "csv"]
    first = run(argv, capsys)
    second = run(argv, capsys)
    assert first == second


def test_resonance_rows(capsys, tables):
    code, out = run(["resonance", "--dmax", "4", "--format", "csv"], capsys)
    assert code == EXIT_OK
    for r in csv_records(out):
        assert [r.value, r.value2] == tables["e_res"][f"d{r.d}"][str(r.D)]


def test_nonsym_marks_oscillation(capsys):
    code, out = run(["nonsym", "--dmax", "5", "--d", "0"], capsys)
    assert code == EXIT_OK
    assert any(line.rstrip().endswith("*") for line in out.splitlines())


@pytest.mark.parametrize("argv", [["--help"], ["critical", "--help"]])
def test_help(argv, capsys):
    assert main(argv) == EXIT_OK
    assert "usage: rpm" in capsys.readouterr().out


def test_verify(capsys):
    code, out = run(["verify"], capsys)
    assert code == EXIT_OK
    assert out.count("PASS") >= 5 and "FAIL" not in out
