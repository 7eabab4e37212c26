from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from tgm.datatypes import (DataType, TypeRegistry, array_of, check_value, collection, enum_of, optional_of,
                           range_of, record, register_types, sample_value, union_of, witness)
from tgm.errors import DanglingReference, DuplicateLabel, InfiniteType, InvalidTypeDefinition, UnknownType


@pytest.fixture
def reg():
    return TypeRegistry().register(
        range_of("stars", "integer", 1, 5),
        range_of("short", "text", 0, 3),
        range_of("y2k", "date", "2000-01-01", "2000-12-31"),
        enum_of("colour", ["red", "green"]),
        record("Date", [("day", "integer"), ("month", "integer"), ("year", "integer")]),
        record("Review", [("stars", "stars"), ("date", "Date"), ("note", "note?")]),
        optional_of("note?", "text"),
        array_of("pair", "integer", 2),
        collection("tags", "set", "text", 0, 3),
        collection("names", "list", "text", 1),
        union_of("num_or_text", ["integer", "text"]),
    )


def rules(v):
    return [x.rule for x in v.violations]


def test_builtins_present():
    r = TypeRegistry()
    for label in ("integer", "decimal", "text", "boolean", "date", "Empty"):
        assert label in r


def test_primitive_values(reg):
    assert check_value(reg, "integer", 3).ok
    assert rules(check_value(reg, "integer", True)) == ["TypeMismatch"]
    assert rules(check_value(reg, "integer", 3.0)) == ["TypeMismatch"]
    assert check_value(reg, "decimal", 3).ok
    assert rules(check_value(reg, "decimal", float("nan"))) == ["TypeMismatch"]
    assert check_value(reg, "date", "2012-07-30").ok
    assert rules(check_value(reg, "date", "30/07/2012")) == ["TypeMismatch"]
    assert check_value(reg, "boolean", False).ok


def test_ranges(reg):
    assert check_value(reg, "stars", 5).ok
    (v,) = check_value(reg, "stars", 6).violations
    assert v.rule == "OutOfRange" and "1..5" in v.message
    assert check_value(reg, "short", "abc").ok
    assert rules(check_value(reg, "short", "abcd")) == ["OutOfRange"]
    assert rules(check_value(reg, "y2k", "2001-01-01")) == ["OutOfRange"]
    assert rules(check_value(reg, "stars", "5")) == ["TypeMismatch"]


def test_enum_is_type_exact(reg):
    assert check_value(reg, "colour", "red").ok
    assert rules(check_value(reg, "colour", "blue")) == ["NotInEnum"]


def test_record_paths(reg):
    good = {"stars": 3, "date": {"day": 1, "month": 2, "year": 2012}}
    assert check_value(reg, "Review", good).ok
    bad = {"stars": 9, "date": {"day": "x", "month": 2}, "extra": 1}
    v = check_value(reg, "Review", bad)
    assert [(x.rule, x.element) for x in v.violations] == [
        ("TypeMismatch", "$.date.day"),
        ("Missing", "$.date.year"),
        ("UnknownComponent", "$.extra"),
        ("OutOfRange", "$.stars"),
    ]


def test_collections(reg):
    assert check_value(reg, "pair", [1, 2]).ok
    (v,) = check_value(reg, "pair", [1]).violations
    assert v.rule == "Length" and "≠" in v.message
    assert rules(check_value(reg, "tags", ["a", "a"])) == ["DuplicateElement"]
    assert rules(check_value(reg, "tags", ["a", "b", "c", "d"])) == ["Cardinality"]
    assert rules(check_value(reg, "names", [])) == ["Cardinality"]
    assert check_value(reg, "names", ["x", "y", "x"]).ok
    assert rules(check_value(reg, "pair", [1, "b"])) == ["TypeMismatch"]


def test_union(reg):
    assert check_value(reg, "num_or_text", 3).ok
    assert check_value(reg, "num_or_text", "3").ok
    assert rules(check_value(reg, "num_or_text", [3])) == ["NoVariant"]


def test_unknown_type_raises(reg):
    with pytest.raises(UnknownType):
        check_value(reg, "nope", 1)


def test_registration_errors():
    r = TypeRegistry()
    with pytest.raises(DanglingReference):
        r.register(record("A", [("b", "B")]))
    with pytest.raises(DuplicateLabel):
        r.register(record("A")).register(record("A", [("x", "integer")]))
    with pytest.raises(InvalidTypeDefinition):
        r.register(range_of("bad", "integer", 5, 1))
    with pytest.raises(InvalidTypeDefinition):
        r.register(range_of("bad", "boolean", 0, 1))
    with pytest.raises(InvalidTypeDefinition):
        r.register(enum_of("bad", ["a", "a"]))
    with pytest.raises(InvalidTypeDefinition):
        r.register(record("bad", [("a", "integer"), ("a", "text")]))
    # re-registering an identical definition is harmless
    a = r.register(record("A"))
    assert a.register(record("A")).get("A") == record("A")


def test_recursive_types_need_a_finite_value():
    r = TypeRegistry()
    with pytest.raises(InfiniteType):
        r.register(record("Loop", [("next", "Loop")]))
    tree = r.register(record("Tree", [("kids", "Trees")]), collection("Trees", "list", "Tree", 0))
    assert check_value(tree, "Tree", {"kids": [{"kids": []}]}).ok
    assert check_value(tree, "Tree", witness(tree, "Tree")).ok


def test_sets_need_enough_distinct_elements():
    r = TypeRegistry()
    with pytest.raises(InfiniteType):
        r.register(collection("pairs", "set", "Empty", 2))
    with pytest.raises(InfiniteType):
        r.register(collection("three_bools", "set", "boolean", 3))
    ok = r.register(optional_of("b?", "boolean"), collection("all_b", "set", "b?", 3, 3))
    value = witness(ok, "all_b")
    assert check_value(ok, "all_b", value).ok
    assert sorted(map(str, value)) == ["False", "None", "True"]
    rng = random.Random(0)
    assert all(check_value(ok, "all_b", sample_value(ok, "all_b", rng)).ok for _ in range(20))


def test_registration_is_order_insensitive():
    defs = [record("A", [("b", "B?")]), optional_of("B?", "B"), record("B", [("a", "A2")]),
            record("A2"), array_of("As", "A", 2)]
    labels = None
    for perm in itertools.permutations(defs):
        r = register_types(TypeRegistry(), perm)
        assert labels is None or sorted(r.types) == labels
        labels = sorted(r.types)


def test_json_roundtrip(reg):
    again = TypeRegistry.from_json(reg.to_json())
    assert again.types == reg.types
    for t in reg.user_types():
        assert DataType.from_json(t.to_json()) == t


def test_witness_and_samples_validate(reg):
    rng = random.Random(1)
    for label in reg.types:
        assert check_value(reg, label, witness(reg, label)).ok, label
        for _ in range(20):
            assert check_value(reg, label, sample_value(reg, label, rng)).ok, label


_PRIMS = ["integer", "decimal", "text", "boolean", "date"]


@st.composite
def registries(draw):
    """Random well-formed registries built bottom-up."""
    defs: list[DataType] = []
    labels = list(_PRIMS)
    for i in range(draw(st.integers(1, 8))):
        kind = draw(st.sampled_from(["record", "optional", "array", "list", "set", "union", "range", "enum"]))
        name = f"T{i}"
        if kind == "record":
            comps = draw(st.lists(st.sampled_from(labels), max_size=4))
            defs.append(record(name, [(f"c{j}", c) for j, c in enumerate(comps)]))
        elif kind == "optional":
            defs.append(optional_of(name, draw(st.sampled_from(labels))))
        elif kind == "array":
            defs.append(array_of(name, draw(st.sampled_from(labels)), draw(st.integers(0, 3))))
        elif kind in ("list", "set"):
            lo = draw(st.integers(0, 2))
            hi = draw(st.sampled_from(["*", lo + 1, lo + 3]))
            elem = draw(st.sampled_from(labels))
            if kind == "set" and elem == "boolean":
                lo = min(lo, 2)
                hi = 2
            defs.append(collection(name, kind, elem, lo, hi))
        elif kind == "union":
            defs.append(union_of(name, draw(st.lists(st.sampled_from(labels), min_size=1, max_size=3,
                                                     unique=True))))
        elif kind == "range":
            lo = draw(st.integers(-5, 5))
            defs.append(range_of(name, "integer", lo, lo + draw(st.integers(0, 10))))
        else:
            defs.append(enum_of(name, draw(st.lists(st.text(min_size=1, max_size=3), min_size=1, max_size=4,
                                                    unique=True))))
        labels.append(name)
    try:
        return TypeRegistry().register(*defs), labels
    except InfiniteType:
        # e.g. a set needing more distinct elements than its element type has
        assume(False)


@settings(max_examples=80, deadline=None)
@given(registries(), st.integers(0, 2**32))
def test_property_sampled_values_typecheck(drawn, seed):
    reg, labels = drawn
    rng = random.Random(seed)
    for label in labels:
        assert check_value(reg, label, sample_value(reg, label, rng)).ok, label
        assert check_value(reg, label, witness(reg, label)).ok, label
