import json
from dataclasses import replace

import pytest

from timebound.core import CostModel, IntConst, OracleInfo
from timebound.harness import (
    SamplingConfig, SamplingExhausted, check_amortized_telescoping, check_bound,
    check_interpreter_differential, check_substitution_lemma, sample_program_states,
    sample_state, states_for_values, write_summary,
)
from timebound.interp import ProgramState, holds, int_log2
from timebound.parser import parse_aexp, parse_assertion, parse_program

from conftest import load


def test_sampling_true_accepts_everything():
    r = sample_state(parse_assertion("true"), {"x", "y"}, 50, seed=1)
    assert len(r.states) == 50 and r.attempts == 50 and r.acceptance_rate == 1.0


def test_sampling_dependent_log():
    pre = parse_assertion("n >= 0 and size = log(n)")
    r = sample_state(pre, {"n", "size"}, 40, seed=2)
    for s in r.states:
        assert s.get("size") == int_log2(s.get("n"))


def test_sampling_false_exhausts():
    with pytest.raises(SamplingExhausted):
        sample_state(parse_assertion("false"), {"x"}, 1, seed=0)
    with pytest.raises(SamplingExhausted):
        sample_state(parse_assertion("x > 100"), {"x"}, 1, seed=0)
    with pytest.raises(ValueError):
        sample_state(parse_assertion("true"), {"x"}, 0, seed=0)


def test_sampling_respects_box_and_is_deterministic():
    cfg = SamplingConfig(scalar_box=(-3, 4), cell_box=(2, 5), size_box=(0, 6))
    a = sample_state(parse_assertion("true"), {"x", "y"}, 100, 7, arrays={"A"}, config=cfg)
    b = sample_state(parse_assertion("true"), {"x", "y"}, 100, 7, arrays={"A"}, config=cfg)
    assert a.states == b.states
    for s in a.states:
        assert all(-3 <= v <= 5 for v in s.scalars.values())
        assert all(2 <= v <= 5 for v in s.arrays.values())
        assert max((i for _, i in s.arrays), default=-1) < 6


def test_header_overrides():
    p = load("binary_search")
    cfg = SamplingConfig.from_program(p)
    assert cfg.box("n") == (1, 32) and cfg.cell_box == (0, 64) and cfg.length_var == "n"
    for s in sample_program_states(p, 30, 3).states:
        assert 1 <= s.get("n") <= 32
        assert s.array_extent("a") == s.get("n")
        assert holds(p.precondition, s)


def test_division_has_no_violations():
    r = check_bound(load("division"), trials=200, seed=0)
    assert r.ok, r.text()
    assert r.trials == 200


def test_range_filter_exact():
    r = check_bound(load("range_filter"), trials=200, seed=0)
    assert r.ok, r.text()
    assert r.stats["branches_probed"] > 0


def test_tampered_exact_bound_fails_every_trial():
    p = replace(load("range_filter"), cost_bound=parse_aexp("13 * n + 9"))
    r = check_bound(p, trials=50, seed=0)
    exact = [v for v in r.violations if v.kind == "exact"]
    assert sorted({v.trial for v in exact}) == list(range(50))
    v = exact[0]
    assert v.measured_cost is not None and v.bound_value is not None and v.state


def test_runtime_errors_are_reported():
    p = parse_program("{ true } x = 1 / y { true | 5 }")
    states = [ProgramState({"y": 0}), ProgramState({"y": 1})]
    r = check_bound(p, states=states)
    assert [v.kind for v in r.violations] == ["runtime"]


def test_wrong_postcondition_reported():
    p = parse_program("{ true } x = 1 { x = 2 | 5 }")
    r = check_bound(p, trials=5, seed=0)
    assert {v.kind for v in r.violations} == {"postcondition"}


def test_branch_imbalance_detected():
    p = parse_program("#mode: exact\n{ true } if x < 0 then x = 0 else skip end { true | 3 }")
    r = check_bound(p, states=[ProgramState({"x": 1})])
    assert "branch-imbalance" in {v.kind for v in r.violations}


def test_binary_counter_telescoping():
    p = load("binary_counter")
    states = states_for_values(p, "n", range(1, 65))
    assert sorted(s.get("n") for s in states) == list(range(1, 65))
    r = check_amortized_telescoping(p, states=states)
    assert r.ok, r.text()


def test_zero_amortized_cost_fails_first_iteration():
    p = load("binary_counter")
    info = p.oracle_for(1)
    bad = replace(p, oracle=((0, p.oracle_for(0)), (1, replace(info, amortized=IntConst(0)))))
    s = ProgramState({"n": 2, "size": 1, "c": 13})
    r = check_amortized_telescoping(bad, states=[s])
    steps = [v for v in r.violations if v.kind == "amortized-step"]
    assert steps and "loop 1" in steps[0].message


def test_zero_iteration_loop_passes():
    src = ("#mode: amortized\n{ true } while x < 0 [invariant: true; variant: x; bound: 0; "
           "amortized: 1; potential: 0] do x = x + 1 end { true | 3 }")
    r = check_amortized_telescoping(parse_program(src), states=[ProgramState({"x": 5})])
    assert r.ok and r.stats["iterations"] == 0


def test_telescoping_needs_amortized_mode():
    with pytest.raises(ValueError):
        check_amortized_telescoping(load("division"), trials=1)


def test_substitution_lemma_small():
    r = check_substitution_lemma(500, seed=4)
    assert r.ok, r.text()
    # P = (x = 0), a = 5: both sides decide 5 = 0.
    from timebound.core import subst_assertion
    p = parse_assertion("x = 0")
    out = subst_assertion(p, "x", IntConst(5))
    assert out == parse_assertion("5 = 0")
    bound = parse_assertion("forall x. x = x")
    assert subst_assertion(bound, "x", IntConst(5)) == bound


def test_interpreter_differential_small():
    r = check_interpreter_differential(500, seed=5)
    assert r.ok, r.text()


def test_reports_deterministic_and_serializable(tmp_path):
    a = check_bound(load("insertion_sort"), trials=30, seed=9)
    b = check_bound(load("insertion_sort"), trials=30, seed=9)
    assert a.text() == b.text()
    path = tmp_path / "s.json"
    write_summary([a], str(path))
    data = json.loads(path.read_text())
    assert data[0]["name"] == "program" and data[0]["trials"] == 30 and data[0]["seed"] == 9
    assert data[0]["violations"] == 0
