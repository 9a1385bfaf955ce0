import json
import sys

import pytest

from timebound.cli import main, parse_state
from timebound.interp import ProgramState

from conftest import CORPUS, needs_z3

PY = sys.executable


def f(name):
    return str(CORPUS / f"{name}.imp")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_state_parsing():
    s = parse_state(["x=3,y=-10", "A=[1, 2,3]"])
    assert s == ProgramState.of({"x": 3, "y": -10}, {"A": [1, 2, 3]})
    with pytest.raises(Exception):
        parse_state(["x=three"])


def test_run_swap(capsys):
    code, out, _ = run(capsys, "run", f("swap"), "--state", "x=3,y=10")
    assert code == 0 and out.splitlines()[-1] == "cost 6"
    assert "x = 10" in out and "y = 3" in out


def test_run_division(capsys):
    code, out, _ = run(capsys, "run", f("division"), "--state", "x=7,y=2")
    assert code == 0 and "q = 3" in out and "r = 1" in out


def test_run_errors(capsys, tmp_path):
    assert run(capsys, "run", str(tmp_path / "missing.imp"))[0] == 2
    bad = tmp_path / "bad.imp"
    bad.write_text("{ true } x = { true | 1 }")
    assert run(capsys, "run", str(bad))[0] == 2
    div = tmp_path / "div.imp"
    div.write_text("{ true } x = 1 / y { true | 1 }")
    code, _, err = run(capsys, "run", str(div))
    assert code == 1 and "DivByZero" in err
    loop = tmp_path / "loop.imp"
    loop.write_text("{ true } while true [invariant: true; variant: 0; bound: 0; cost: fun k -> 0] do skip end { true | 1 }")
    assert run(capsys, "run", str(loop), "--fuel", "10")[0] == 1


def test_cost_model_flag(capsys, tmp_path):
    cm = tmp_path / "m.cost"
    cm.write_text("C_ASSIGN_V = 3\n")
    code, out, _ = run(capsys, "run", f("swap"), "--state", "x=1", "--cost-model", str(cm))
    assert code == 0 and out.splitlines()[-1] == "cost 12"


@pytest.mark.parametrize("name,extra,count", [("insertion_sort", [], 10), ("range_filter", ["--mode", "exact"], 5),
                                              ("binary_search", [], 6), ("binary_counter", [], 12)])
def test_vcs_counts(capsys, name, extra, count):
    code, out, _ = run(capsys, "vcs", f(name), *extra)
    assert code == 0 and out.splitlines()[-1] == f"{count} VCs"


def test_vcs_writes_files(capsys, tmp_path):
    code, out, _ = run(capsys, "vcs", f("division"), "--format", "smt", "--out", str(tmp_path))
    assert code == 0 and out.strip() == "6 VCs"
    assert len(list(tmp_path.glob("division.*.smt2"))) == 6
    assert len((tmp_path / "division.index").read_text().splitlines()) == 6


def test_vcs_oracle_missing(capsys):
    code, _, err = run(capsys, "vcs", f("binary_counter"), "--mode", "classic")
    assert code == 3 and "oracle" in err


def test_output_is_stable(capsys):
    a = run(capsys, "vcs", f("insertion_sort"), "--format", "smt")
    b = run(capsys, "vcs", f("insertion_sort"), "--format", "smt")
    assert a == b


@needs_z3
def test_check_trivial(capsys):
    code, out, _ = run(capsys, "check", f("swap"))
    assert code == 0 and "2/2 Valid" in out


@needs_z3
def test_check_tampered_exact_bound(capsys, tmp_path):
    src = (CORPUS / "range_filter.imp").read_text().replace("| 22 * n + 5 }", "| 13 * n + 9 }")
    bad = tmp_path / "rf.imp"
    bad.write_text(src)
    code, out, _ = run(capsys, "check", str(bad), "--jobs", "4")
    assert code == 4
    assert any(l.startswith("cost-bound") and "Invalid" in l for l in out.splitlines())


def test_check_absent_solver(capsys):
    code, out, _ = run(capsys, "check", f("swap"), "--solver", "/nonexistent/z3")
    assert code == 5 and "SolverError" in out


def test_check_env_solver(capsys, monkeypatch, tmp_path):
    fake = f"{PY} -c \"import sys; sys.stdin.read(); print('unsat')\""
    monkeypatch.setenv("TIMEBOUND_SOLVER", fake)
    summary = tmp_path / "s.json"
    code, _, _ = run(capsys, "check", f("division"), "--summary", str(summary))
    assert code == 0
    assert set(json.loads(summary.read_text())["goals"].values()) == {"Valid"}


def test_fuzz(capsys, tmp_path):
    code, out, _ = run(capsys, "fuzz", f("binary_counter"), "--trials", "64")
    assert code == 0 and "0 violations" in out
    src = (CORPUS / "range_filter.imp").read_text().replace("| 22 * n + 5 }", "| 13 * n + 9 }")
    bad = tmp_path / "rf.imp"
    bad.write_text(src)
    code, out, _ = run(capsys, "fuzz", str(bad), "--trials", "20", "--summary", str(tmp_path / "s.json"))
    assert code == 6 and "[exact]" in out
    assert json.loads((tmp_path / "s.json").read_text())[0]["violations"] >= 20
    assert run(capsys, "fuzz", f("swap"), "--trials", "0")[0] == 2


def test_usage_errors(capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys)[0] == 2
    assert run(capsys, "vcs", f("swap"), "--mode", "weird")[0] == 2
