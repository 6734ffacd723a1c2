import json

import pytest

from chshq.cli import main
from chshq.game import DeterministicStrategy


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_construct_writes_documents(tmp_path, capsys):
    out = tmp_path / "s.json"
    code, stdout, _ = run(capsys, "construct", "--p", "1499", "--out", str(out))
    assert code == 0
    strategy = DeterministicStrategy.loads(out.read_text())
    assert strategy.q == 1499
    report = json.loads((tmp_path / "s.report.json").read_text())
    assert report == json.loads(stdout)
    assert report["win_count"] == 5719 and report["lines_kept"] == 342


@pytest.mark.parametrize("argv, code", [
    (("construct", "--p", "6"), 2),
    (("construct", "--p", "7"), 3),
    (("audit", "--p", "4"), 2),
    (("bounds", "--q", "1"), 2),
    (("oracle", "--q", "11"), 6),
    (("oracle", "--q", "9"), 2),
    (("evaluate", "--builtin", "trivial"), 2),
    (("frobnicate",), 2),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_oracle_refusal_reports_cost(capsys):
    _, _, err = run(capsys, "oracle", "--q", "11")
    assert "3.452e+13" in err


def test_evaluate_builtins(capsys):
    code, out, _ = run(capsys, "evaluate", "--p", "3", "--builtin", "trivial")
    assert code == 0 and json.loads(out)["win_count"] == 5
    code, out, _ = run(capsys, "evaluate", "--p", "101", "--builtin", "explicit")
    assert code == 0 and json.loads(out)["win_count"] == 240


def test_evaluate_document(tmp_path, capsys):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"q": 5, "alice": [0, 0, 0, 0, 1], "bob": [0, 3, 2, 1, 0]}))
    code, out, _ = run(capsys, "evaluate", "--strategy", str(path))
    assert code == 0 and json.loads(out)["win_probability"] == "12/25"
    assert run(capsys, "evaluate", "--strategy", str(path), "--p", "7")[0] == 4


@pytest.mark.parametrize("text", ['{"q": 5, "alice": [0, 0', '{"q": 5}', '{"q": 4, "alice": [0,0,0,0], "bob": [0,0,0,0]}'])
def test_evaluate_malformed(tmp_path, capsys, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    assert run(capsys, "evaluate", "--strategy", str(path))[0] == 4


def test_evaluate_missing_file(tmp_path, capsys):
    assert run(capsys, "evaluate", "--strategy", str(tmp_path / "nope.json"))[0] == 4


def test_audit(capsys):
    code, out, _ = run(capsys, "audit", "--p", "101")
    doc = json.loads(out)
    assert code == 0 and doc["advisory"] and doc["middle_band_violations"] == 0
    code, out, _ = run(capsys, "audit", "--p", "101", "--format", "csv")
    assert code == 0 and out.startswith("k,band,solution_count\n1,small,")


def test_oracle(capsys):
    code, out, _ = run(capsys, "oracle", "--q", "2")
    doc = json.loads(out)
    assert code == 0 and doc["optimal_value"] == "3/4" and doc["max_wins"] == 3
    assert DeterministicStrategy.from_document(doc["witness"]).q == 2


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "--q", "2")
    assert code == 0 and json.loads(out)["quantum_upper_bound"] == pytest.approx(0.8535533905932737)
    code, out, _ = run(capsys, "bounds", "--q", "40009")
    doc = json.loads(out)
    assert doc["classical_guarantee"]["win_floor"] == 62199 and doc["trivial_win_count"] == 80017
    code, out, _ = run(capsys, "bounds", "--q", "4")
    assert code == 0 and json.loads(out)["quantum_upper_bound_note"] == "formula value only"


@pytest.mark.parametrize("argv", [("evaluate", "--p", "1009", "--builtin", "explicit"),
                                  ("oracle", "--q", "5"), ("audit", "--p", "1499")])
def test_output_independent_of_threads(capsys, argv):
    outs = {run(capsys, *argv, "--threads", str(t))[1] for t in (1, 2, 5)}
    assert len(outs) == 1


def test_output_round_trips(tmp_path, capsys):
    out = tmp_path / "s.json"
    run(capsys, "construct", "--p", "101", "--out", str(out))
    s = DeterministicStrategy.loads(out.read_text())
    assert DeterministicStrategy.loads(s.dumps()) == s
