import sys

import pytest

from timebound.core import ATrue, AForall
from timebound.emit import (
    brute_force_check, closed_formula, is_linear, make_goal, render_smt, render_text,
    run_solver, run_solver_all, write_goals,
)
from timebound.parser import parse_assertion
from timebound.vcg import VerificationCondition, vcg

from conftest import load, needs_z3

PY = sys.executable


def _vc(text, logic=()):
    return VerificationCondition("goal", parse_assertion(text), "correctness", logic_vars=logic)


def _fake_solver(answer: str) -> str:
    return f"{PY} -c \"import sys; sys.stdin.read(); print('{answer}')\""


def test_text_rendering():
    assert render_text(VerificationCondition("t", ATrue(), "correctness")) == "true"
    v = _vc("k > 0 => b + a >= k", ("k", "b", "a"))
    f = closed_formula(v)
    binders = []
    while isinstance(f, AForall):
        binders.append(f.binder)
        f = f.body
    assert binders == ["a", "b", "k"]


def test_division_exit_vc_renders_invariant():
    v = next(v for v in vcg(load("division")) if v.name == "while0.loop-exit")
    assert "x = q * y + r" in render_text(v)


def test_smt_shape():
    smt = render_smt(_vc("0 = 0 => 1 >= 1"))
    assert "(set-logic ALL)" in smt and smt.rstrip().endswith("(check-sat)")
    assert "(assert (not" in smt


def test_log_is_declared_for_binary_search():
    v = next(v for v in vcg(load("binary_search")) if v.name == "cost-bound")
    smt = render_smt(v)
    assert "(declare-fun log2 (Int) Int)" in smt


def test_arrays_declared_as_int_arrays():
    v = next(v for v in vcg(load("range_filter")) if v.name == "correctness")
    assert "(declare-const a_b (Array Int Int))" in render_smt(v)


def test_fake_solver_answers():
    g = make_goal(_vc("1 = 1"))
    assert run_solver(g, _fake_solver("unsat")).status == "Valid"
    assert run_solver(g, _fake_solver("sat")).status == "Invalid"
    assert run_solver(g, _fake_solver("unknown")).status == "Unknown"
    assert run_solver(g, _fake_solver("bogus")).status == "SolverError"
    assert run_solver(g, "/nonexistent/solver").status == "SolverError"
    slow = f"{PY} -c \"import time; time.sleep(5)\""
    assert run_solver(g, slow, timeout=0.5).status == "Timeout"


@needs_z3
def test_z3_trivial_and_false():
    assert run_solver(make_goal(_vc("0 = 0 => 1 >= 1"))).status == "Valid"
    assert run_solver(make_goal(_vc("0 = 1"))).status == "Invalid"


@needs_z3
def test_z3_division_exit_condition():
    g = make_goal(_vc("x = q * y + r and y > 0 and r >= 0 and y <= r => x - r <= x"))
    assert run_solver(g).status == "Valid"


@needs_z3
def test_z3_parallel_matches_serial():
    goals = [make_goal(v) for v in vcg(load("swap"))]
    serial = [g.status for g in run_solver_all(goals, jobs=1)]
    par = [g.status for g in run_solver_all(goals, jobs=4)]
    assert serial == par == ["Valid", "Valid"]


def test_write_goals(tmp_path):
    goals = [make_goal(v) for v in vcg(load("division"))]
    paths = write_goals("division", goals, tmp_path, "smt")
    assert len(paths) == 7
    index = (tmp_path / "division.index").read_text().splitlines()
    assert [l.split("\t")[0] for l in index] == [g.vc_name for g in goals]
    assert (tmp_path / "division.cost-bound.smt2").read_text().splitlines()[1] == "(set-logic ALL)"
    write_goals("division", goals, tmp_path / "txt", "text")
    assert (tmp_path / "txt" / "division.correctness.txt").exists()


def test_brute_force():
    assert brute_force_check(_vc("x + 1 > x")).status == "Valid"
    r = brute_force_check(_vc("x * x > x"))
    assert r.status == "Invalid" and r.counterexample in ({"x": 0}, {"x": 1})
    assert brute_force_check(_vc("forall x. x = x and (exists y. y > 2)")).status == "Unsupported"
    assert brute_force_check(_vc("a[0] = 1")).status == "Unsupported"
    # Undefined points are skipped, not counterexamples.
    assert brute_force_check(_vc("x / x = 1")).status == "Valid"


def test_linearity_classifier():
    assert is_linear(_vc("2 * x + 3 <= y"))
    assert not is_linear(_vc("x * y <= 3"))
    assert not is_linear(_vc("exists z. z = x"))
    vcs = {v.name: v for v in vcg(load("division"))}
    assert is_linear(vcs["correctness"]) and is_linear(vcs["cost-bound"])
