import random

import pytest
from hypothesis import given, settings

from timebound.core import Assign, Seq, Skip, Var
from timebound.harness import RandomGen
from timebound.parser import (
    OracleMissingError, ParseError, parse_aexp, parse_assertion, parse_cost_model,
    parse_program, parse_stmt, pretty_print, show_aexp, show_assertion, show_stmt, tokenize,
)

from conftest import CORPUS, DATA, load
from strategies import aexps, assertions, loop_free_stmts

CORPUS_FILES = sorted(p.stem for p in CORPUS.glob("*.imp"))


def test_swap_parses_to_right_nested_assigns():
    p = parse_program("{ true } z = x; x = y; y = z { true | 6 }")
    assert p.body == Seq(Assign("z", Var("x")), Seq(Assign("x", Var("y")), Assign("y", Var("z"))))
    assert p.mode == "classic"


def test_listing_bound_prints_verbatim():
    p = parse_program((DATA / "binary_search_listing.imp").read_text())
    assert show_aexp(p.cost_bound) == "43 * log(n) + 10"


def test_while_rejected_in_exact_mode():
    with pytest.raises(ParseError, match="while not allowed in exact mode"):
        parse_stmt("while i < n do skip end", "exact")


def test_for_rejected_outside_exact_mode():
    with pytest.raises(ParseError):
        parse_program("{ true } for i = 0 to n [invariant: true] do skip end { true | 1 }")


def test_annotation_functions_rejected_in_code():
    with pytest.raises(ParseError):
        parse_program("{ true } x = log(4) { true | 1 }")


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as ei:
        parse_program("{ true }\nx = ;\n{ true | 1 }")
    assert ei.value.span.line == 2


def test_mode_specific_oracle_fields():
    with pytest.raises(OracleMissingError) as ei:
        load("binary_counter", mode="classic")
    assert ei.value.field_name == "cost" and ei.value.loop_id == 1
    with pytest.raises(ParseError):
        parse_program("#mode: exact\n{ true } for i = 0 to 3 [invariant: true; variant: i] do skip end { true | 1 }")


def test_header_mode_and_override():
    src = "#mode: amortized\n{ true } skip { true | 1 }"
    assert parse_program(src).mode == "amortized"
    assert parse_program(src, "classic").mode == "classic"
    assert parse_program(src).headers == ()


def test_cost_model_file():
    assert parse_cost_model("C_MUL = 3")["C_MUL"] == 3
    assert parse_cost_model("C_MUL = 3")["C_ADD"] == 1
    assert parse_cost_model("") == parse_cost_model("# nothing\n")
    with pytest.raises(ParseError):
        parse_cost_model("C_BOGUS = 1")


def test_printing_small_forms():
    assert show_stmt(Skip()) == "skip"
    s = parse_stmt("a = 1; b = 2; c = 3")
    assert isinstance(s.second, Seq)
    assert parse_stmt(show_stmt(s)) == s


def test_precedence_roundtrip_examples():
    for src in ["a - (b - c)", "(a - b) - c", "2 ^ 3 ^ 2", "(2 ^ 3) ^ 2", "-3 * x", "0 - (x + 1)", "a / b * c"]:
        e = parse_aexp(src)
        assert parse_aexp(show_aexp(e)) == e
    for src in ["(a => b) => c", "a => b => c", "not (x = 1 and y = 2)", "(forall k. k = 1) and z = 2"]:
        src = src.replace("a", "x = 1").replace("b", "y = 1").replace("c", "z = 1") if "=>" in src else src
        p = parse_assertion(src)
        assert parse_assertion(show_assertion(p)) == p


def test_primed_identifiers():
    assert [t.text for t in tokenize("x' = x + 1")][:1] == ["x'"]


@pytest.mark.parametrize("name", CORPUS_FILES)
def test_corpus_roundtrip(name):
    p = load(name)
    text = pretty_print(p)
    again = parse_program(text)
    assert again == p
    assert pretty_print(again) == text


def test_random_program_roundtrip():
    rng = random.Random(11)
    gen = RandomGen(rng)
    for _ in range(300):
        p = gen.program()
        assert parse_program(pretty_print(p)) == p


@settings(max_examples=200, deadline=None)
@given(aexps())
def test_aexp_roundtrip(e):
    assert parse_aexp(show_aexp(e)) == e


@settings(max_examples=200, deadline=None)
@given(assertions())
def test_assertion_roundtrip(p):
    assert parse_assertion(show_assertion(p)) == p


@settings(max_examples=200, deadline=None)
@given(loop_free_stmts())
def test_stmt_roundtrip(s):
    assert parse_stmt(show_stmt(s)) == s
