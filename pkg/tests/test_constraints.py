from __future__ import annotations

import pytest

from tgm.constraints import (BoolOp, Cmp, Count, Env, Lit, Path, Unique, Xor, evaluate, parse_constraint,
                             typecheck)
from tgm.datatypes import TypeRegistry, array_of, enum_of, optional_of, range_of, record
from tgm.errors import ConstraintSyntaxError, EvaluationError


@pytest.fixture
def reg():
    return TypeRegistry().register(
        range_of("stars", "integer", 1, 5),
        record("Date", [("day", "integer"), ("month", "integer"), ("year", "integer")]),
        optional_of("text?", "text"),
        enum_of("colour", ["red", "green"]),
        record("Item", [("profit", "integer")]),
        optional_of("Item?", "Item"),
        array_of("Items", "Item?", 3),
        record("Props", [("stars", "stars"), ("date", "Date"), ("nick", "text?"), ("colour", "colour"),
                         ("when", "date"), ("flag", "boolean"), ("items", "Items"), ("voc:tag", "text")]),
    )


def test_parse_shapes():
    assert parse_constraint("stars >= 1") == Cmp(">=", Path(("stars",)), Lit(1))
    assert parse_constraint("count(has_line) >= 1") == Cmp(">=", Count("has_line"), Lit(1))
    assert parse_constraint("unique(a, b.c)") == Unique((Path(("a",)), Path(("b", "c"))))
    assert parse_constraint("xor(items)") == Xor((Path(("items",)),))
    assert parse_constraint("items.0.profit > 2") == Cmp(">", Path(("items", 0, "profit")), Lit(2))
    ast = parse_constraint("a = 1 or b = 2 and c = 3")
    assert isinstance(ast, BoolOp) and ast.op == "or"
    assert parse_constraint("voc:tag = 'x'") == Cmp("=", Path(("voc:tag",)), Lit("x"))
    assert parse_constraint("flag = true") == Cmp("=", Path(("flag",)), Lit(True))


@pytest.mark.parametrize("text", ["", "stars >=", "count(", "unique()", "a = = 1", "(a = 1", "a = 1 b", "1.x"])
def test_syntax_errors(text):
    with pytest.raises(ConstraintSyntaxError):
        parse_constraint(text)


def test_typecheck_accepts_well_typed(reg):
    for expr in ["stars >= 1", "date.year > 1900 and stars <= 5", "nick = 'billy'", "colour = 'red'",
                 "when > '2000-01-01'", "flag = false", "xor(items)", "unique(nick)", "items.2.profit >= 0",
                 "count(wrote) >= 1", "voc:tag != ''"]:
        typecheck(expr, reg, "Props", is_node=True, edge_labels=["wrote"])


@pytest.mark.parametrize("expr", ["stars", "nope > 1", "stars > 'x'", "date > 1", "flag < true",
                                  "items.3.profit > 0", "stars.0 = 1", "count(unknown) > 0",
                                  "stars = 1 and 2"])
def test_typecheck_rejects(reg, expr):
    with pytest.raises(ConstraintSyntaxError):
        typecheck(expr, reg, "Props", is_node=True, edge_labels=["wrote"])


def test_count_is_for_nodes_only(reg):
    with pytest.raises(ConstraintSyntaxError):
        typecheck("count(wrote) > 0", reg, "Props", is_node=False, edge_labels=["wrote"])


def test_evaluate_comparisons_and_logic():
    props = {"stars": 3, "date": {"year": 2012}, "when": "2012-07-30", "nick": None}
    env = Env(props, count=lambda label: {"wrote": 2}.get(label, 0))
    assert evaluate("stars >= 1 and stars <= 5", env)
    assert not evaluate("stars > 3 or date.year < 2000", env)
    assert evaluate("count(wrote) = 2 and count(other) = 0", env)
    assert evaluate("when > '2012-07-29'", env)
    assert evaluate("when < '2012-12-01'", env)


def test_absent_path_is_an_evaluation_error():
    with pytest.raises(EvaluationError):
        evaluate("nick = 'x'", Env({"nick": None}))
    with pytest.raises(EvaluationError):
        evaluate("a.b > 1", Env({"a": {}}))
    with pytest.raises(EvaluationError):
        evaluate("a > 'x'", Env({"a": 1}))


def test_xor_semantics():
    assert evaluate("xor(items)", Env({"items": [None, {"p": 1}, None]}))
    assert not evaluate("xor(items)", Env({"items": [None, None, None]}))
    assert not evaluate("xor(items)", Env({"items": [{"p": 1}, None, {"p": 2}]}))
    assert evaluate("xor(a, b)", Env({"a": 1, "b": None}))
    assert not evaluate("xor(a, b)", Env({"a": 1, "b": 2}))
    assert not evaluate("xor(a, b)", Env({}))
    # false counts as not present
    assert evaluate("xor(a, b)", Env({"a": False, "b": True}))


def test_unique_delegates_to_environment():
    seen = []
    env = Env({"k": 1, "j": "x"}, unique=lambda values: seen.append(values) or False)
    assert not evaluate("unique(k, j)", env)
    assert seen == [(1, "x")]
    # an absent key does not clash with anything
    assert evaluate("unique(missing)", Env({}, unique=lambda values: False))
