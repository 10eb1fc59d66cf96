import csv
import io
import json
import math

import jsonschema
import pytest

from favard import cli, report
from favard.errors import InsufficientData
from favard.geometry import QuadratureSpec
from favard.models import FOUR_CORNER


def run(args, tmp_path, name="out.json"):
    out = tmp_path / name
    code = cli.main(list(args) + ["--out", str(out)])
    return code, (out.read_text() if out.exists() else None)


def test_favard_command(tmp_path):
    code, text = run(["favard", "--model", "fourcorner", "--n", "0"], tmp_path)
    assert code == 0
    row = json.loads(text)["rows"][0]
    assert row["favard"] == pytest.approx(4 / math.pi, abs=1e-10)


def test_unknown_flag_writes_nothing(tmp_path, capsys):
    code, text = run(["favard", "--n", "1", "--bogus", "3"], tmp_path)
    assert code == 1 and text is None
    assert "usage" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == []


@pytest.mark.parametrize("argv", [
    ["favard"],
    ["favard", "--n", "1", "--n-range", "1..2"],
    ["favard", "--n-range", "3..1"],
    ["favard", "--n", "1", "--model", "koch"],
    ["favard", "--n", "1", "--trials", "0"],
    ["pairs", "--n", "2", "--model", "sierpinski"],
])
def test_usage_errors(tmp_path, argv):
    code, text = run(argv, tmp_path)
    assert code == 1 and text is None


def test_budget_exit(tmp_path):
    code, text = run(["pairs", "--n", "9"], tmp_path)
    assert code == 2 and text is None


def test_nonconvergence_exit_still_writes(tmp_path):
    code, text = run(["favard", "--n", "3", "--panels", "1", "--nodes", "2", "--tol", "1e-14",
                      "--max-doublings", "1"], tmp_path)
    assert code == 3
    assert json.loads(text)["rows"][0]["converged"] is False


def test_report_validates_against_schema(tmp_path):
    code, text = run(["report", "--model", "fourcorner", "--n-range", "1..4", "--seeds", "2"], tmp_path)
    assert code == 0
    payload = json.loads(text)
    jsonschema.validate(payload, report.load_schema())
    fits = payload["fits"]
    assert fits["c_lower"] > 0
    rows = payload["tables"]
    by_hand = min(r["n"] * r["favard"] / math.log(r["n"]) for r in rows if r["n"] >= 2)
    assert fits["c_lower"] == by_hand
    assert [r["n"] for r in payload["random_average"]] == [1, 2, 3, 4]


def test_report_single_level_has_no_fits(tmp_path):
    code, text = run(["report", "--n", "3"], tmp_path)
    payload = json.loads(text)
    assert code == 0 and payload["fits"] is None
    jsonschema.validate(payload, report.load_schema())


def test_report_csv(tmp_path):
    code, text = run(["report", "--n-range", "0..2", "--format", "csv"], tmp_path, "r.csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [r["n"] for r in rows] == ["0", "1", "2"]
    assert float(rows[0]["favard"]) == pytest.approx(4 / math.pi, abs=1e-10)
    assert rows[0]["zeta"] == ""


def test_output_independent_of_threads(tmp_path):
    outs = []
    for threads in ("1", "2"):
        code, text = run(["report", "--n-range", "1..3", "--threads", threads, "--seeds", "2"],
                         tmp_path, f"t{threads}.json")
        assert code == 0
        outs.append(text)
    assert outs[0] == outs[1]
    code, a = run(["needle", "--n", "3", "--trials", "20000", "--threads", "1"], tmp_path, "a.json")
    code, b = run(["needle", "--n", "3", "--trials", "20000", "--threads", "2"], tmp_path, "b.json")
    assert a == b


def test_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("FAVARD_TRIALS", "1234")
    code, text = run(["needle", "--n", "1"], tmp_path)
    assert json.loads(text)["rows"][0]["trials"] == 1234
    code, text = run(["needle", "--n", "1", "--trials", "99"], tmp_path)
    assert json.loads(text)["rows"][0]["trials"] == 99


@pytest.mark.parametrize("argv,column", [
    (["needle", "--n", "2", "--trials", "1000"], "hits"),
    (["profile", "--n", "1", "--grid", "16"], "support_length"),
    (["pairs", "--n", "2"], "count"),
    (["pairs", "--n", "3", "--table", "overlaps"], "partial_sum"),
    (["pairs", "--n", "4", "--table", "violations", "--samples", "8"], "j_actual"),
    (["energy", "--n", "2"], "energy_over_n"),
    (["median", "--n", "1", "--grid", "64"], "chebyshev_bound"),
    (["sierpinski", "--n", "1"], "zeta"),
    (["random", "--n", "1", "--seeds", "2"], "mean"),
])
def test_commands_emit_csv(tmp_path, argv, column):
    code, text = run(argv + ["--format", "csv"], tmp_path, "x.csv")
    assert code == 0
    assert column in text.splitlines()[0].split(",")


def test_dump_cells(tmp_path):
    cells = tmp_path / "cells.csv"
    code, _ = run(["profile", "--n", "1", "--grid", "16", "--dump-cells", str(cells)], tmp_path)
    rows = list(csv.DictReader(io.StringIO(cells.read_text())))
    assert code == 0 and len(rows) == 4
    assert set(rows[0]) == {"level", "corner_x", "corner_y", "side"}


def test_fit_constants_needs_two_levels():
    with pytest.raises(InsufficientData):
        report.fit_constants([{"n": 3, "favard": 0.8}])
    rows = [report.table_row(FOUR_CORNER, n, QuadratureSpec()) for n in (2, 3)]
    fits = report.fit_constants(rows)
    # fits are online min/max: one more level can only lower c_lower
    more = report.fit_constants(rows + [report.table_row(FOUR_CORNER, 4, QuadratureSpec())])
    assert more["c_lower"] <= fits["c_lower"]


def test_csv_formatting():
    text = report.to_csv([{"a": 0.1, "b": None, "c": True}])
    assert text == "a,b,c\n0.10000000000000001,,true\n"
