import random

import pytest
from hypothesis import given, settings, strategies as st

from timebound.core import (
    AForall, ACmp, ATrue, Add, ArrRead, CostModel, COST_NAMES, IntConst, Mul, SumExpr, Var,
    fresh_name, free_vars, rename_array, subst_aexp, subst_array, subst_assertion,
)
from timebound.interp import ExecutionError, ProgramState, eval_aexp, holds
from timebound.parser import parse_aexp, parse_assertion, show_assertion

from strategies import assertions, aexps, names, states


def test_free_vars_skip_sum_binder():
    assert free_vars(parse_aexp("sum(x, 0, 10, x) + 2 ^ y + z")) == {"y", "z"}


def test_free_vars_constant_and_array_read():
    assert free_vars(IntConst(5)) == set()
    assert free_vars(parse_aexp("x[i + j]")) == {"x", "i", "j"}


def test_subst_aexp_linear_example():
    e = parse_aexp("x + 4 * y + 3")
    assert subst_aexp(e, "y", parse_aexp("z + 4")) == parse_aexp("x + 4 * (z + 4) + 3")


def test_subst_aexp_absent_and_shadowed():
    e = parse_aexp("x + 1")
    assert subst_aexp(e, "q", IntConst(9)) == e
    s = parse_aexp("sum(x, 0, n, x)")
    assert subst_aexp(s, "x", IntConst(5)) == s


def test_subst_assertion_invariant_example():
    p = parse_assertion("x = q * y + r")
    assert subst_assertion(p, "q", parse_aexp("q + 1")) == parse_assertion("x = (q + 1) * y + r")


def test_subst_assertion_bound_variable_untouched():
    p = parse_assertion("forall k. k < x")
    assert subst_assertion(p, "k", parse_aexp("k + 1")) == p


def test_subst_assertion_alpha_renames_on_capture():
    p = parse_assertion("forall k. k < x")
    out = subst_assertion(p, "x", Var("k"))
    assert isinstance(out, AForall) and out.binder != "k"
    rng = random.Random(3)
    for _ in range(50):
        sigma = ProgramState({"k": rng.randint(-9, 9), "x": rng.randint(-9, 9)})
        dom = range(-12, 13)
        assert holds(out, sigma, dom) == holds(p, sigma.with_scalar("x", sigma.get("k")), dom)


def test_subst_array_same_index_and_unrelated():
    p = parse_assertion("B[j] = 1")
    assert subst_array(p, "B", Var("j"), IntConst(0)) == parse_assertion("0 = 1")
    q = parse_assertion("x = 3")
    assert subst_array(q, "B", Var("j"), IntConst(0)) == q


def test_subst_array_case_split_by_evaluation():
    p = parse_assertion("B[0] = 1")
    out = subst_array(p, "B", Var("j"), IntConst(0))
    assert show_assertion(out) == "(j = 0 => 0 = 1) and (j != 0 => B[0] = 1)"
    for j in (0, 1):
        sigma = ProgramState({"j": j}, {("B", 0): 1})
        after = sigma.with_cell("B", j, 0)
        assert holds(out, sigma) == holds(p, after)


def test_subst_array_rhs_reads_same_array():
    # x[j+1] = x[j] must use the old x[j] on the right.
    p = parse_assertion("x[1] = x[0] and x[2] = 7")
    out = subst_array(p, "x", parse_aexp("j + 1"), parse_aexp("x[j]"))
    for j in range(-1, 3):
        sigma = ProgramState({"j": j}, {("x", i): 10 + i for i in range(-1, 4)} | {("x", 2): 7})
        after = sigma.with_cell("x", j + 1, sigma.read("x", j))
        assert holds(out, sigma) == holds(p, after)


@settings(max_examples=300, deadline=None)
@given(assertions(), st.sampled_from(("A", "B")), aexps(max_leaves=3), aexps(max_leaves=3), states())
def test_array_substitution_lemma(p, arr, idx, rhs, sigma):
    try:
        i = eval_aexp(idx, sigma)
        v = eval_aexp(rhs, sigma)
        dom = range(-3, 4)
        lhs = holds(subst_array(p, arr, idx, rhs), sigma, dom)
        right = holds(p, sigma.with_cell(arr, i, v), dom)
    except ExecutionError:
        return
    assert lhs == right


def test_fresh_name_smallest_suffix():
    assert fresh_name("k", set()) == "k"
    assert fresh_name("k", {"k"}) == "k1"
    assert fresh_name("pk", {"pk", "pk1"}) == "pk2"


def test_rename_array_is_total():
    e = parse_aexp("a[a[i]] + b[0]")
    assert rename_array(e, "a", "c") == parse_aexp("c[c[i]] + b[0]")


def test_cost_model_defaults_and_overrides():
    m = CostModel.unit()
    assert all(m[n] == 1 for n in COST_NAMES)
    m3 = CostModel.from_mapping({"C_MUL": 3})
    assert m3["C_MUL"] == 3 and m3["C_ADD"] == 1
    with pytest.raises(ValueError):
        CostModel.from_mapping({"C_BOGUS": 1})
    with pytest.raises(ValueError):
        CostModel.from_mapping({"C_ADD": -1})
    assert m.with_sum_cost("paper").sum_cost == "paper"
