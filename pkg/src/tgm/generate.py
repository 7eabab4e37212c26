"""Witness instances: random but valid instance graphs for a schema.

The generator places one node of every node type, then repairs minimum
multiplicity deficits by adding edges, reusing existing nodes where their
maximum allows and creating new ones while the node budget lasts.  Property
values are sampled from their types and resampled until the constraints hold.
Everything is driven by one ``random.Random(seed)``, so equal seeds give
equal instances.
"""

from __future__ import annotations

import random
from collections import defaultdict

from .datatypes import sample_value
from .errors import UnsatisfiableSchema
from .instance import InstanceEdge, InstanceNode, TypedGraphInstance, validate_instance
from .schema import TypedGraphSchema

_ATTEMPTS = 50
_RESAMPLES = 25


class _Builder:
    def __init__(self, schema: TypedGraphSchema, rng: random.Random, size: int, seed: int):
        self.s = schema
        self.rng = rng
        self.size = size
        self.seed = seed
        self.nodes: dict[str, InstanceNode] = {}
        self.edges: dict[str, InstanceEdge] = {}
        self.by_type: dict[str, list[str]] = defaultdict(list)
        # (node id, edge label, side, pos) -> occurrences
        self.occ: dict[tuple[str, str, str, int], int] = defaultdict(int)

    def new_node(self, type_label: str) -> str:
        if len(self.nodes) >= self.size:
            raise UnsatisfiableSchema(f"node budget {self.size} exhausted")
        nid = f"n{len(self.nodes)}"
        nt = self.s.node_types[type_label]
        nested = None
        if nt.nested_schema is not None and nt.nested_schema.node_types:
            nested = gen_instance(nt.nested_schema, self.rng.randrange(1 << 30),
                                  max(self.size, len(nt.nested_schema.node_types)))
        self.nodes[nid] = InstanceNode(nid, type_label, self.props(nt.property_type, len(self.nodes)),
                                       nested)
        self.by_type[type_label].append(nid)
        return nid

    def props(self, type_label: str, salt: int):
        return sample_value(self.s.registry, type_label, self.rng, salt=salt)

    def deficits(self) -> list[tuple[str, str, str, int]]:
        out = []
        for nid in sorted(self.nodes, key=lambda k: int(k[1:])):
            ntype = self.nodes[nid].type
            for et in self.s.edges_touching(ntype):
                for side, pos, p in et.ends:
                    if p.node_type == ntype and self.occ[(nid, et.label, side, pos)] < p.multiplicity.min:
                        out.append((nid, et.label, side, pos))
        return out

    def has_room(self, nid: str, label: str, side: str, pos: int, mult) -> bool:
        return mult.unbounded or self.occ[(nid, label, side, pos)] < mult.max

    def pick(self, label: str, side: str, pos: int, part, used: set[str]) -> str:
        cands = [n for n in self.by_type[part.node_type]
                 if self.has_room(n, label, side, pos, part.multiplicity)]
        self.rng.shuffle(cands)
        # nodes still short at this end first, then fresh faces, then the least used
        cands.sort(key=lambda n: (self.occ[(n, label, side, pos)] >= part.multiplicity.min,
                                  n in used, self.occ[(n, label, side, pos)]))
        if cands and (cands[0] not in used or len(self.nodes) >= self.size):
            return cands[0]
        if len(self.nodes) < self.size:
            return self.new_node(part.node_type)
        raise UnsatisfiableSchema(f"no {part.node_type} node can fill {label} {side}[{pos}]")

    def add_edge(self, anchor: str, label: str, side: str, pos: int) -> None:
        et = self.s.edge_types[label]
        fill = {(side, pos): anchor}
        used = {anchor}
        for s2, p2, part in et.ends:
            if (s2, p2) in fill:
                continue
            nid = self.pick(label, s2, p2, part, used)
            fill[(s2, p2)] = nid
            used.add(nid)
        eid = f"e{len(self.edges)}"
        tails = tuple(fill[("tail", i)] for i in range(len(et.tail)))
        heads = tuple(fill[("head", i)] for i in range(len(et.head)))
        self.edges[eid] = InstanceEdge(eid, label, tails, heads, self.props(et.property_type, len(self.edges)))
        for (s2, p2), nid in fill.items():
            self.occ[(nid, label, s2, p2)] += 1

    def run(self) -> TypedGraphInstance:
        for label in sorted(self.s.node_types):
            self.new_node(label)
        guard = 0
        while True:
            todo = self.deficits()
            if not todo:
                break
            guard += 1
            if guard > 10_000:
                raise UnsatisfiableSchema("multiplicity repair does not converge")
            nid, label, side, pos = todo[0]
            self.add_edge(nid, label, side, pos)
        return TypedGraphInstance(self.s, self.nodes, self.edges)


def _repair_properties(g: TypedGraphInstance, rng: random.Random) -> TypedGraphInstance:
    """Resample the properties of elements that break constraints or property types."""
    reg = g.schema.registry
    for round_ in range(_RESAMPLES):
        verdict = validate_instance(g)
        if verdict.ok:
            return g
        bad = {v.element for v in verdict.violations if v.rule in ("Constraint", "ConstraintError", "PropertyType")}
        if not bad or len(bad) < len({v.element for v in verdict.violations}):
            return g
        nodes, edges = dict(g.nodes), dict(g.edges)
        for el in sorted(bad):
            salt = rng.randrange(1 << 20) + round_
            if el in nodes:
                n = nodes[el]
                pt = g.schema.node_types[n.type].property_type
                nodes[el] = InstanceNode(n.id, n.type, sample_value(reg, pt, rng, salt=salt), n.nested)
            elif el in edges:
                e = edges[el]
                pt = g.schema.edge_types[e.type].property_type
                edges[el] = InstanceEdge(e.id, e.type, e.tails, e.heads, sample_value(reg, pt, rng, salt=salt))
        g = TypedGraphInstance(g.schema, nodes, edges)
    return g


def gen_instance(schema: TypedGraphSchema, seed: int = 0, size: int = 10) -> TypedGraphInstance:
    """Generate a valid instance with at least one node per node type and at most ``size`` nodes.

    Raises UnsatisfiableSchema if no attempt finds one within the budget.
    """
    if not schema.node_types:
        return TypedGraphInstance(schema)
    if size < len(schema.node_types):
        raise UnsatisfiableSchema(
            f"size {size} cannot hold one node of each of {len(schema.node_types)} node types")
    rng = random.Random(seed)
    last = "no attempt made"
    for _ in range(_ATTEMPTS):
        try:
            g = _Builder(schema, rng, size, seed).run()
        except UnsatisfiableSchema as exc:
            last = str(exc)
            continue
        g = _repair_properties(g, rng)
        verdict = validate_instance(g)
        if verdict.ok:
            return g
        last = "; ".join(f"{v.rule} {v.element}" for v in verdict.violations[:5])
    raise UnsatisfiableSchema(f"no valid instance of at most {size} nodes found ({last})")
