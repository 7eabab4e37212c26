from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tgm.errors import EvaluationError
from tgm.generate import gen_instance
from tgm.instance import (DeleteEdge, DeleteNode, InsertEdge, InsertNode, InstanceEdge, InstanceNode,
                          TypedGraphInstance, UpdateEdge, UpdateNode, apply_mutations, dump_instance,
                          evaluate_constraint, load_instance, revalidate, stage, validate_instance)
from tgm.schema import Constraint, TypedGraphSchema, load_schema


@pytest.fixture
def review_schema(fixtures):
    return load_schema(fixtures / "review.tgs.json")


@pytest.fixture
def review(fixtures, review_schema):
    return load_instance(fixtures / "review.tgm.json", review_schema)


def rules(g):
    return validate_instance(g).rules()


DATE = {"day": 1, "month": 1, "year": 2000}


def test_untyped_and_property_errors(review):
    g = stage(review, [InsertNode("Ghost", {}, id="g1")]).instance
    assert "Untyped" in rules(g)
    g = stage(review, [UpdateNode("r1", {"stars": 9, "date": DATE})]).instance
    (v,) = validate_instance(g).violations
    assert v.rule == "PropertyType" and v.element == "r1" and "$.stars" in v.message


def test_edge_shape_errors(review):
    g = stage(review, [InsertEdge("review_of", ["r1", "billy"], ["p1"], id="bad")]).instance
    assert "EdgeArity" in rules(g)
    g = stage(review, [InsertEdge("review_of", ["billy"], ["p1"], id="bad")]).instance
    assert "EndpointType" in rules(g)
    g = stage(review, [DeleteNode("p1")]).instance
    assert "DanglingEndpoint" in rules(g)


def test_multiplicity_upper_bound(review):
    g = stage(review, [InsertNode("Performance", {"title": "Hamlet", "date": DATE}, id="p2"),
                       InsertEdge("review_of", ["r1"], ["p2"], id="o9")]).instance
    (v,) = [v for v in validate_instance(g).violations if v.element == "r1"]
    assert v.rule == "Multiplicity" and "2 not in 1..1" in v.message


def test_json_roundtrip(tmp_path, review, review_schema):
    path = tmp_path / "g.json"
    dump_instance(review, path, schema_ref="review.tgs.json")
    doc = json.loads(path.read_text())
    assert doc["schema"] == "review.tgs.json"
    again = load_instance(path, review_schema)
    assert again.nodes == review.nodes and again.edges == review.edges


def _keyed_schema():
    return TypedGraphSchema.from_json({
        "types": [{"label": "K", "kind": "record", "components": [{"name": "k", "type": "integer"},
                                                                  {"name": "note", "type": "text?"}]},
                  {"label": "text?", "kind": "optional", "element": "text"}],
        "nodes": [{"label": "Item", "properties": "K"}, {"label": "Box", "properties": "Empty"}],
        "edges": [{"label": "in", "kind": "plain", "properties": "Empty",
                   "tail": [{"node": "Item", "min": 1, "max": 1}], "head": [{"node": "Box", "min": 0, "max": 2}]}],
        "constraints": [{"label": "key", "scope": "Item", "expr": "unique(k)"},
                        {"label": "noted", "scope": "Item", "expr": "note != 'forbidden'"}],
    })


def test_unique_constraint_and_absent_paths():
    s = _keyed_schema()
    g = TypedGraphInstance.build(s, [InstanceNode("b", "Box"), InstanceNode("i1", "Item", {"k": 1, "note": "a"}),
                                     InstanceNode("i2", "Item", {"k": 1, "note": "b"})],
                                 [InstanceEdge("e1", "in", ("i1",), ("b",)), InstanceEdge("e2", "in", ("i2",), ("b",))])
    verdict = validate_instance(g)
    assert [(v.rule, v.element) for v in verdict.violations] == [("Constraint", "i1"), ("Constraint", "i2")]
    g2 = stage(g, [UpdateNode("i2", {"k": 2, "note": None})]).instance
    # comparing an absent note is an evaluation error, reported as such
    assert [(v.rule, v.element) for v in validate_instance(g2).violations] == [("ConstraintError", "i2")]
    with pytest.raises(EvaluationError):
        evaluate_constraint(g2, s.constraints["noted"], "i2")
    assert evaluate_constraint(g2, s.constraints["key"], "i1")


def test_unique_peer_revalidation():
    """Changing one node's key can break (or fix) a constraint on an untouched peer."""
    s = _keyed_schema()
    g = TypedGraphInstance.build(s, [InstanceNode("b", "Box"), InstanceNode("i1", "Item", {"k": 1, "note": "a"}),
                                     InstanceNode("i2", "Item", {"k": 2, "note": "b"})],
                                 [InstanceEdge("e1", "in", ("i1",), ("b",)), InstanceEdge("e2", "in", ("i2",), ("b",))])
    st_ = stage(g, [UpdateNode("i2", {"k": 1, "note": "b"})])
    assert revalidate(st_).violations == validate_instance(st_.instance).violations
    assert {v.element for v in revalidate(st_).violations} == {"i1", "i2"}


def test_mutation_errors(review):
    after, verdict = apply_mutations(review, [InsertNode("User", {"name": "x"}, id="billy")])
    assert after is review and "DuplicateId" in verdict.rules()
    _, verdict = apply_mutations(review, [UpdateNode("nobody", {}), DeleteEdge("nothing")])
    assert verdict.rules().count("UnknownId") == 2
    _, verdict = apply_mutations(review, ["not a mutation"])
    assert "UnknownMutation" in verdict.rules()


def test_fresh_ids_and_batch_semantics(review):
    after, verdict = apply_mutations(review, [
        InsertNode("User", {"name": "Ann"}),
        InsertNode("Review", {"stars": 1, "date": DATE}),
    ])
    assert not verdict.ok  # incomplete: neither has its edges
    st_ = stage(review, [InsertNode("User", {"name": "Ann"}), InsertNode("User", {"name": "Bo"})])
    new = sorted(set(st_.instance.nodes) - set(review.nodes))
    assert len(new) == 2 and all(n not in review.nodes for n in new)


def test_delete_review_with_edges_keeps_user_invalid(review):
    after, verdict = apply_mutations(review, [DeleteEdge("w1"), DeleteEdge("o1"), DeleteNode("r1")])
    assert not verdict.ok
    assert [v.element for v in verdict.violations] == ["billy"]
    after, verdict = apply_mutations(review, [DeleteEdge("w1"), DeleteEdge("o1"), DeleteNode("r1"),
                                              DeleteNode("billy")])
    assert verdict.ok and set(after.nodes) == {"p1"}


def test_update_edge_properties(fixtures):
    s = load_schema(fixtures / "bom.tgs.json")
    g, _ = apply_mutations(gen_instance(s, seed=3, size=4), [
        InsertNode("Part", {"partNo": 100, "name": "frame"}, id="a"),
        InsertNode("Part", {"partNo": 101, "name": "bolt"}, id="b"),
        InsertEdge("contains", ["a"], ["b"], {"quantity": 4}, id="u1"),
    ])
    assert "u1" in g.edges
    eid = "u1"
    after, verdict = apply_mutations(g, [UpdateEdge(eid, {"quantity": 0})])
    assert not verdict.ok and verdict.rules() == ["Constraint"]
    after, verdict = apply_mutations(g, [UpdateEdge(eid, {"quantity": 7})])
    assert verdict.ok and after.edges[eid].properties == {"quantity": 7}


def test_nested_instances(fixtures):
    from tgm.abstraction import fold, load_grouping
    s = load_schema(fixtures / "enterprise.tgs.json")
    folded, _ = fold(s, load_grouping(fixtures / "enterprise.groups.json"))
    g = gen_instance(folded, seed=0)
    assert validate_instance(g).ok
    nid, node = next((k, n) for k, n in g.nodes.items() if n.nested is not None)
    inner = node.nested
    broken_inner = stage(inner, [InsertNode("Stranger", {}, id="s0")]).instance
    broken = stage(g, [DeleteNode(nid), InsertNode(node.type, node.properties, id=nid, nested=broken_inner)])
    assert any(v.element.startswith(f"{nid}/") for v in validate_instance(broken.instance).violations)
    flat = stage(g, [DeleteNode(nid), InsertNode(node.type, node.properties, id=nid)]).instance
    # a missing nested graph is read as the empty graph
    assert all(not v.element.startswith(f"{nid}/") or v.rule in ("Multiplicity", "Constraint")
               for v in validate_instance(flat).violations)
    review = stage(g, [UpdateNode(nid, node.properties)]).instance
    assert review.nodes[nid].nested is node.nested


MUTATIONS = st.lists(st.tuples(st.sampled_from(["ins_item", "ins_box", "upd", "del_node", "ins_edge",
                                                "del_edge"]),
                               st.integers(0, 5), st.integers(0, 5), st.integers(0, 3)),
                     min_size=1, max_size=5)


@settings(max_examples=200, deadline=None)
@given(MUTATIONS, st.integers(0, 50))
def test_property_incremental_equals_full(ops, seed):
    s = _keyed_schema()
    g = gen_instance(s, seed=seed, size=6)
    assert validate_instance(g).ok
    nodes, edges = sorted(g.nodes), sorted(g.edges)
    batch = []
    for op, a, b, k in ops:
        if op == "ins_item":
            batch.append(InsertNode("Item", {"k": k, "note": None}))
        elif op == "ins_box":
            batch.append(InsertNode("Box", {}))
        elif op == "upd":
            batch.append(UpdateNode(nodes[a % len(nodes)], {"k": k, "note": "x"}))
        elif op == "del_node":
            batch.append(DeleteNode(nodes[a % len(nodes)]))
        elif op == "ins_edge":
            batch.append(InsertEdge("in", [nodes[a % len(nodes)]], [nodes[b % len(nodes)]]))
        elif edges:
            batch.append(DeleteEdge(edges[a % len(edges)]))
    st_ = stage(g, batch)
    assert revalidate(st_).violations == validate_instance(st_.instance).violations
