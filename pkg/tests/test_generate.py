from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tgm.errors import UnsatisfiableSchema
from tgm.generate import gen_instance
from tgm.instance import dump_instance, validate_instance
from tgm.schema import (Constraint, EdgeType, Multiplicity, NodeType, Participation, TypedGraphSchema,
                        load_schema)
from tgm.datatypes import TypeRegistry, record


def test_deterministic_per_seed(fixtures):
    s = load_schema(fixtures / "enterprise.tgs.json")
    assert dump_instance(gen_instance(s, seed=4)) == dump_instance(gen_instance(s, seed=4))
    assert len({dump_instance(gen_instance(s, seed=k)) for k in range(5)}) > 1


def test_size_bound_and_coverage(fixtures):
    s = load_schema(fixtures / "enterprise.tgs.json")
    for size in (7, 10, 20):
        g = gen_instance(s, seed=1, size=size)
        assert len(g.nodes) <= size
        assert {n.type for n in g.nodes.values()} == set(s.node_types)


def test_empty_schema():
    g = gen_instance(TypedGraphSchema())
    assert not g.nodes and not g.edges


def test_too_small_budget(fixtures):
    with pytest.raises(UnsatisfiableSchema):
        gen_instance(load_schema(fixtures / "enterprise.tgs.json"), size=3)


def test_unsatisfiable_multiplicities():
    # each A needs exactly three edges and each B exactly one, so one A already needs 3 B nodes
    s = TypedGraphSchema.build(nodes=[NodeType("A", "Empty"), NodeType("B", "Empty")], edges=[
        EdgeType("ab", "Empty", "plain", (Participation("A", Multiplicity(3, 3)),),
                 (Participation("B", Multiplicity(1, 1)),))])
    with pytest.raises(UnsatisfiableSchema):
        gen_instance(s, size=3)
    assert validate_instance(gen_instance(s, size=4)).ok


def test_unsatisfiable_constraint():
    reg = TypeRegistry().register(record("P", [("n", "integer")]))
    s = TypedGraphSchema.build(reg, [NodeType("A", "P")], constraints=[
        Constraint("never", "A", "n > 5 and n < 3")])
    with pytest.raises(UnsatisfiableSchema):
        gen_instance(s, size=2)


def test_constraints_are_satisfied_by_resampling():
    reg = TypeRegistry().register(record("P", [("n", "integer")]))
    s = TypedGraphSchema.build(reg, [NodeType("A", "P")], constraints=[Constraint("big", "A", "n > 900")])
    for seed in range(10):
        g = gen_instance(s, seed=seed)
        assert validate_instance(g).ok
        assert all(n.properties["n"] > 900 for n in g.nodes.values())


@st.composite
def satisfiable_schemas(draw):
    """Schemas whose minimums can always be met by reusing nodes (all maxima unbounded)."""
    labels = [f"N{i}" for i in range(draw(st.integers(2, 5)))]
    edges = []
    for i in range(draw(st.integers(0, 6))):
        ends = draw(st.lists(st.sampled_from(labels), min_size=2, max_size=min(3, len(labels)), unique=True))
        parts = [Participation(n, Multiplicity(draw(st.integers(0, 2)), "*")) for n in ends]
        edges.append(EdgeType(f"e{i}", "Empty", draw(st.sampled_from(["plain", "aggregation"])),
                              tuple(parts[:1]), tuple(parts[1:])))
    return TypedGraphSchema.build(nodes=[NodeType(n, "Empty") for n in labels], edges=edges)


@settings(max_examples=100, deadline=None)
@given(satisfiable_schemas(), st.integers(0, 10 ** 6))
def test_property_generated_instances_validate(s, seed):
    g = gen_instance(s, seed=seed, size=len(s.node_types) + 4)
    assert validate_instance(g).ok


def test_random_edge_bounded_schemas():
    rng = random.Random(11)
    made = 0
    for _ in range(100):
        a = Multiplicity(rng.randint(0, 2), rng.choice([2, 3, "*"]))
        b = Multiplicity(rng.randint(0, 1), rng.choice([1, 2, "*"]))
        s = TypedGraphSchema.build(nodes=[NodeType("A", "Empty"), NodeType("B", "Empty")], edges=[
            EdgeType("ab", "Empty", "plain", (Participation("A", a),), (Participation("B", b),))])
        try:
            g = gen_instance(s, seed=rng.randrange(1000), size=8)
        except UnsatisfiableSchema:
            continue
        made += 1
        assert validate_instance(g).ok
    assert made > 80
