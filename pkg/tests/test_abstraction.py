from __future__ import annotations

import json
import random
import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tgm.abstraction import Aggregate, FoldReport, GroupingSpec, LossyUnfold, MixedKind, fold, load_grouping, unfold
from tgm.errors import DanglingLabel, FoldError, NotAHyperNode, OverlappingGroups
from tgm.generate import gen_instance
from tgm.instance import validate_instance
from tgm.schema import (EdgeType, Multiplicity, NodeType, Participation, TypedGraphSchema, load_schema,
                        most_general_multiplicity, validate_schema)


@pytest.fixture
def enterprise(fixtures):
    return load_schema(fixtures / "enterprise.tgs.json"), load_grouping(fixtures / "enterprise.groups.json")


def test_fold_shape(enterprise):
    s, spec = enterprise
    folded, report = fold(s, spec)
    sales = folded.node_types["Sales"]
    assert sorted(sales.nested_schema.node_types) == ["CustOrder", "Customer", "OrderLine"]
    assert sorted(sales.nested_schema.edge_types) == ["has_line", "places"]
    # the group's aggregate becomes a property of the hyper-node
    props = folded.registry.get(sales.property_type)
    assert props.component_type("#orders") == "integer"
    assert sorted(folded.edge_types) == ["from/orders", "purchases/supplies"]
    assert sorted(m.label for m in report.merged_edges) == ["from/orders", "purchases/supplies"]
    # issued_to and consists_of stay inside their groups
    assert "issued_to" in folded.node_types["Purchasing"].nested_schema.edge_types
    assert "consists_of" in folded.node_types["Production"].nested_schema.edge_types


def test_fold_keeps_and_moves_constraints(enterprise):
    s, spec = enterprise
    folded, report = fold(s, spec)
    inner = folded.node_types["Sales"].nested_schema
    assert "key:Customer" in inner.constraints
    assert "order_has_lines" in inner.constraints
    assert "positive_quantity" in inner.constraints
    assert validate_schema(folded).ok
    assert report.removed_constraints == ()


def test_fold_report_json_roundtrip(enterprise):
    s, spec = enterprise
    _, report = fold(s, spec)
    assert FoldReport.from_json(json.loads(json.dumps(report.to_json()))) == report


def test_unfold_one_group_at_a_time(enterprise):
    s, spec = enterprise
    folded, report = fold(s, spec)
    partial = unfold(folded, "Sales", report)
    assert validate_schema(partial).ok
    assert {"Customer", "CustOrder", "OrderLine", "Production", "Purchasing"} == set(partial.node_types)
    # orders and from still share a signature (OrderLine -> Production), so they stay merged
    merged = partial.edge_types["from/orders"]
    assert [p.node_type for p in merged.tail + merged.head] == ["OrderLine", "Production"]
    assert "places" in partial.edge_types and "has_line" in partial.edge_types
    final = unfold(unfold(partial, "Production", report), "Purchasing", report)
    assert final.canonical() == s.canonical()


def test_unfold_order_does_not_matter(enterprise):
    s, spec = enterprise
    folded, report = fold(s, spec)
    for order in (["Sales", "Production", "Purchasing"], ["Purchasing", "Sales", "Production"]):
        cur = folded
        for g in order:
            cur = unfold(cur, g, report)
        assert cur.canonical() == s.canonical()


def test_lossy_unfold_warns(enterprise):
    s, spec = enterprise
    folded, _ = fold(s, spec)
    with pytest.warns(LossyUnfold):
        out = unfold(folded, "Sales")
    assert "Customer" in out.node_types
    assert validate_schema(out).ok


def test_unfold_non_hyper_node(enterprise):
    s, _ = enterprise
    with pytest.raises(NotAHyperNode):
        unfold(s, "Customer")


def test_spec_errors(enterprise):
    s, _ = enterprise
    with pytest.raises(DanglingLabel):
        fold(s, GroupingSpec({"G": ("Nope",)}))
    with pytest.raises(OverlappingGroups):
        fold(s, GroupingSpec({"G": ("Customer",), "H": ("Customer", "Part")}))
    with pytest.raises(FoldError):
        fold(s, GroupingSpec({"places": ("Customer",)}))
    with pytest.raises(DanglingLabel):
        fold(s, GroupingSpec({"G": ("Customer",)}, (Aggregate("H", "#x", "places"),)))
    with pytest.raises(DanglingLabel):
        fold(s, GroupingSpec({"G": ("Customer",)}, (Aggregate("G", "#x", "nothing"),)))


def test_empty_spec_is_identity(enterprise):
    s, _ = enterprise
    folded, report = fold(s, GroupingSpec({}))
    assert folded.canonical() == s.canonical()
    assert report == FoldReport()


def test_mixed_kinds_warn():
    s = TypedGraphSchema.build(nodes=[NodeType(n, "Empty") for n in "ABC"], edges=[
        EdgeType("x", "Empty", "composition", (Participation("A"),), (Participation("B"),)),
        EdgeType("y", "Empty", "plain", (Participation("A"),), (Participation("C"),)),
    ])
    with pytest.warns(MixedKind):
        folded, _ = fold(s, GroupingSpec({"BC": ("B", "C")}))
    assert folded.edge_types["x/y"].kind == "plain"


def test_folded_instances_generate_and_validate(enterprise):
    s, spec = enterprise
    folded, _ = fold(s, spec)
    for seed in range(5):
        assert validate_instance(gen_instance(folded, seed=seed)).ok


# random schemas

def _random_schema(rng: random.Random) -> tuple[TypedGraphSchema, GroupingSpec]:
    labels = [f"N{i}" for i in range(rng.randint(2, 7))]
    edges = []
    for i in range(rng.randint(1, 8)):
        def part():
            lo = rng.randint(0, 2)
            hi = rng.choice(["*", lo + rng.randint(0, 2) or 1])
            return Participation(rng.choice(labels), Multiplicity(lo, hi))
        tail = (part(),)
        head = tuple(part() for _ in range(rng.randint(1, 2)))
        if len({p.node_type for p in head}) < len(head):
            head = head[:1]
        edges.append(EdgeType(f"e{i}", "Empty", "plain", tail, head))
    s = TypedGraphSchema.build(nodes=[NodeType(n, "Empty") for n in labels], edges=edges)
    shuffled = labels[:]
    rng.shuffle(shuffled)
    groups = {}
    k = 0
    while shuffled and k < 3:
        size = rng.randint(1, len(shuffled))
        groups[f"G{k}"] = tuple(shuffled[:size])
        shuffled = shuffled[size:]
        k += 1
    return s, GroupingSpec(groups)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_property_fold_unfold_roundtrip_and_cover(seed):
    s, spec = _random_schema(random.Random(seed))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MixedKind)
        folded, report = fold(s, spec)
    assert validate_schema(folded).ok
    for m in report.merged_edges:
        merged = folded.edge_types[m.label]
        for side in ("tail", "head"):
            for pos, got in enumerate(getattr(merged, side)):
                sources = [getattr(s.edge_types[src], side)[pos].multiplicity for src in m.sources]
                assert got.multiplicity == most_general_multiplicity(sources)
    order = sorted(spec.groups)
    random.Random(seed + 1).shuffle(order)
    cur = folded
    for g in order:
        cur = unfold(cur, g, report)
        assert validate_schema(cur).ok
    assert cur.canonical() == s.canonical()
