from __future__ import annotations

import json

import pytest

from tgm.errors import EmptyInput, InvalidSchema
from tgm.schema import (Multiplicity, TypedGraphSchema, dump_schema, load_schema, most_general_multiplicity,
                        require_valid, schema_equals, validate_schema)


def doc(**overrides):
    base = {
        "types": [{"label": "P", "kind": "record", "components": [{"name": "n", "type": "integer"}]}],
        "nodes": [{"label": "A", "properties": "P"}, {"label": "B", "properties": "Empty"}],
        "edges": [{"label": "ab", "kind": "plain", "properties": "Empty",
                   "tail": [{"node": "A", "min": 0, "max": "*"}], "head": [{"node": "B", "min": 1, "max": 1}]}],
        "constraints": [{"label": "pos", "scope": "A", "expr": "n > 0"}],
    }
    base.update(overrides)
    return base


def rules(d):
    return validate_schema(TypedGraphSchema.from_json(d)).rules()


def edge(label="ab", kind="plain", tail=(("A", 0, "*"),), head=(("B", 1, 1),), props="Empty", roles=None):
    roles = roles or {}
    return {"label": label, "kind": kind, "properties": props,
            "tail": [{"node": n, "min": lo, "max": hi, **({"role": roles[i]} if i in roles else {})}
                     for i, (n, lo, hi) in enumerate(tail)],
            "head": [{"node": n, "min": lo, "max": hi} for n, lo, hi in head]}


def test_valid_document():
    assert rules(doc()) == []


def test_multiplicity_basics():
    m = Multiplicity(1, 3)
    assert m.admits(1) and m.admits(3) and not m.admits(0) and not m.admits(4)
    assert Multiplicity(0, "*").admits(10 ** 6)
    assert Multiplicity.parse("1..*") == Multiplicity(1, "*")
    assert Multiplicity.parse("2") == Multiplicity(2, 2)
    assert str(Multiplicity(0, 1)) == "0..1"
    assert Multiplicity(0, "*").contains(Multiplicity(3, 7))
    assert not Multiplicity(1, 3).contains(Multiplicity(0, 2))
    assert not Multiplicity(1, 3).contains(Multiplicity(1, "*"))


def test_most_general_multiplicity():
    assert most_general_multiplicity([Multiplicity(0, 1), Multiplicity(1, 1)]) == Multiplicity(0, 1)
    assert most_general_multiplicity([Multiplicity(2, 4), Multiplicity(1, "*")]) == Multiplicity(1, "*")
    with pytest.raises(EmptyInput):
        most_general_multiplicity([])


def test_most_general_multiplicity_brute_force_oracle():
    """Compare against the smallest interval containing every admitted count, found by search."""
    import itertools
    universe = [Multiplicity(lo, hi) for lo in range(4) for hi in [*range(max(lo, 1), 5), "*"]]
    for combo in itertools.combinations(universe, 3):
        covering = [m for m in universe if all(m.contains(x) for x in combo)]
        # the tightest cover is contained in every other cover
        (tightest,) = [m for m in covering if all(o.contains(m) for o in covering)]
        assert most_general_multiplicity(combo) == tightest


@pytest.mark.parametrize("change,rule", [
    ({"nodes": [{"label": "A", "properties": "Nope"}, {"label": "B", "properties": "Empty"}]}, "DanglingType"),
    ({"nodes": [{"label": "A", "properties": "integer"}, {"label": "B", "properties": "Empty"}]},
     "PropertyTypeNotRecord"),
    ({"edges": [edge(kind="mystery")]}, "UnknownEdgeKind"),
    ({"edges": [edge(head=())]}, "EmptyEnd"),
    ({"edges": [edge(head=(("C", 0, 1),))]}, "DanglingNodeType"),
    ({"edges": [edge(head=(("B", 3, 1),))]}, "MinExceedsMax"),
    ({"edges": [edge(head=(("B", -1, 1),))]}, "InvalidMultiplicity"),
    ({"edges": [edge(tail=(("A", 0, 1), ("A", 0, 1)))]}, "DuplicateParticipation"),
    ({"edges": [edge(kind="generalization", props="P")]}, "GeneralizationShape"),
    ({"edges": [edge(kind="generalization", head=(("B", 0, 1), ("A", 0, 1)))]}, "GeneralizationShape"),
    ({"constraints": [{"label": "c", "scope": "Z", "expr": "n > 0"}]}, "DanglingScope"),
    ({"constraints": [{"label": "c", "scope": "A", "expr": "m > 0"}]}, "ConstraintInvalid"),
    ({"constraints": [{"label": "c", "scope": "ab", "expr": "count(ab) > 0"}]}, "ConstraintInvalid"),
    ({"nodes": [{"label": "A", "properties": "P"}, {"label": "B", "properties": "Empty"},
                {"label": "ab", "properties": "Empty"}]}, "AmbiguousLabel"),
])
def test_violation_rules(change, rule):
    assert rule in rules(doc(**change))


def test_distinct_roles_allow_repeated_node_type():
    d = doc(edges=[edge(tail=(("A", 0, 1), ("A", 0, 1)), roles={0: "left", 1: "right"})])
    assert rules(d) == []


def test_user_edge_kinds():
    assert rules(doc(edges=[edge(kind="user:owns")])) == []
    assert "UnknownEdgeKind" in rules(doc(edges=[edge(kind="user:")]))


def test_any_type_is_a_warning():
    d = doc(types=[{"label": "P", "kind": "record", "components": [{"name": "n", "type": "anyType"}]}],
            constraints=[])
    verdict = validate_schema(TypedGraphSchema.from_json(d))
    assert verdict.ok
    assert [w.rule for w in verdict.warnings] == ["WeakType"]


def test_nested_schema_checks_and_cycles():
    inner = {"nodes": [{"label": "X", "properties": "Nope"}], "edges": [], "constraints": []}
    d = doc(nodes=[{"label": "A", "properties": "P", "nested": inner}, {"label": "B", "properties": "Empty"}])
    (v,) = validate_schema(TypedGraphSchema.from_json(d)).violations
    assert v.rule == "DanglingType" and v.element == "A/X"
    cyc = {"nodes": [{"label": "A", "properties": "P"}], "edges": [], "constraints": []}
    d = doc(nodes=[{"label": "A", "properties": "P", "nested": cyc}, {"label": "B", "properties": "Empty"}])
    assert "CyclicContainment" in rules(d)


def test_canonical_roundtrip(tmp_path):
    s = TypedGraphSchema.from_json(doc())
    path = tmp_path / "s.json"
    dump_schema(s, path)
    again = load_schema(path)
    assert again.canonical() == s.canonical()
    assert schema_equals(s, again)
    # order of entries in the document does not matter
    d = doc()
    d["nodes"].reverse()
    assert TypedGraphSchema.from_json(json.loads(json.dumps(d))).canonical() == s.canonical()


def test_require_valid_raises():
    bad = TypedGraphSchema.from_json(doc(edges=[edge(kind="mystery")]))
    with pytest.raises(InvalidSchema):
        require_valid(bad)
    with pytest.raises(InvalidSchema):
        schema_equals(bad, bad)


def test_corpus_schemas_are_valid(fixtures):
    for name in ("review.tgs.json", "enterprise.tgs.json", "bom.tgs.json"):
        verdict = validate_schema(load_schema(fixtures / name))
        assert verdict.ok, (name, verdict.to_dict())
