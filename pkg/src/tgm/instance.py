"""Typed instance graphs, their validation and atomic mutation batches.

Each instance element carries its schema image (``type``); that field is the
typing map.  An edge's ``tails``/``heads`` are positional: ``tails[i]`` fills
the edge type's i-th tail participation.

Multiplicities use the participation reading: for a participation
``(n, (i, k))`` on one end of edge type ``e``, every node of type ``n`` must
fill that end of ``e``-typed edges between ``i`` and ``k`` times.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from .constraints import ABSENT, BoolOp, Cmp, Env, Unique, evaluate, parse_constraint, resolve
from .datatypes import check_value, freeze
from .errors import EvaluationError, TgmError
from .schema import Constraint, TypedGraphSchema, load_schema
from .verdict import Verdict, Violation


@dataclass(frozen=True)
class InstanceNode:
    id: str
    type: str
    properties: object = field(default_factory=dict)
    nested: TypedGraphInstance | None = None


@dataclass(frozen=True)
class InstanceEdge:
    id: str
    type: str
    tails: tuple[str, ...]
    heads: tuple[str, ...]
    properties: object = field(default_factory=dict)

    @property
    def endpoints(self) -> tuple[str, ...]:
        return self.tails + self.heads


@dataclass(frozen=True)
class TypedGraphInstance:
    schema: TypedGraphSchema
    nodes: Mapping[str, InstanceNode] = field(default_factory=dict)
    edges: Mapping[str, InstanceEdge] = field(default_factory=dict)

    @classmethod
    def build(cls, schema: TypedGraphSchema, nodes: Iterable[InstanceNode] = (),
              edges: Iterable[InstanceEdge] = ()) -> TypedGraphInstance:
        return cls(schema, {n.id: n for n in nodes}, {e.id: e for e in edges})

    def incidence(self) -> dict[str, list[tuple[str, str, int]]]:
        """node id -> [(edge id, side, position)]"""
        inc: dict[str, list[tuple[str, str, int]]] = defaultdict(list)
        for eid in sorted(self.edges):
            e = self.edges[eid]
            for i, nid in enumerate(e.tails):
                inc[nid].append((eid, "tail", i))
            for i, nid in enumerate(e.heads):
                inc[nid].append((eid, "head", i))
        return inc

    def to_json(self, schema_ref=None) -> dict:
        out = {}
        if schema_ref is not None:
            out["schema"] = schema_ref
        out["nodes"] = [_node_json(self.nodes[k]) for k in sorted(self.nodes)]
        out["edges"] = [{"id": e.id, "type": e.type, "tails": list(e.tails), "heads": list(e.heads),
                         "properties": e.properties}
                        for e in (self.edges[k] for k in sorted(self.edges))]
        return out

    @classmethod
    def from_json(cls, d: Mapping, schema: TypedGraphSchema) -> TypedGraphInstance:
        nodes = []
        for n in d.get("nodes", []):
            nested = None
            if n.get("nested") is not None:
                inner = schema.node_types.get(n["type"])
                inner_schema = inner.nested_schema if inner and inner.nested_schema else TypedGraphSchema()
                nested = cls.from_json(n["nested"], inner_schema)
            nodes.append(InstanceNode(n["id"], n["type"], n.get("properties", {}), nested))
        edges = [InstanceEdge(e["id"], e["type"], tuple(e.get("tails", [])), tuple(e.get("heads", [])),
                              e.get("properties", {}))
                 for e in d.get("edges", [])]
        return cls.build(schema, nodes, edges)


def _node_json(n: InstanceNode) -> dict:
    out = {"id": n.id, "type": n.type, "properties": n.properties}
    if n.nested is not None:
        out["nested"] = n.nested.to_json()
    return out


def load_instance(path, schema: TypedGraphSchema | None = None) -> TypedGraphInstance:
    import os
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if schema is None:
        ref = doc.get("schema")
        if isinstance(ref, str):
            base = os.path.dirname(os.path.abspath(path))
            schema = load_schema(ref if os.path.isabs(ref) else os.path.join(base, ref))
        elif isinstance(ref, Mapping):
            schema = TypedGraphSchema.from_json(ref)
        else:
            raise TgmError("instance file names no schema")
    return TypedGraphInstance.from_json(doc, schema)


def dump_instance(g: TypedGraphInstance, path=None, schema_ref=None) -> str:
    text = json.dumps(g.to_json(schema_ref), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


# constraint evaluation

def _uniqueness_probe(g: TypedGraphInstance, element_id: str, pool: Mapping, etype: str, ast):
    """Build the ``unique`` callback: no peer of the same type carries the same value tuple."""
    uniques = _collect(ast, Unique)

    def unique(values) -> bool:
        key = freeze([_plain(v) for v in values])
        for u in uniques:
            if len(u.paths) != len(values):
                continue
            for oid, other in pool.items():
                if oid == element_id or other.type != etype:
                    continue
                theirs = [_plain(resolve(other.properties, p)) for p in u.paths]
                if freeze(theirs) == key:
                    return False
        return True

    return unique


def evaluate_constraint(g: TypedGraphInstance, c: Constraint, element_id: str, inc=None) -> bool:
    """Evaluate ``c`` on one element; raises EvaluationError on absent paths or type clashes."""
    if element_id in g.nodes:
        el, pool = g.nodes[element_id], g.nodes
        inc = g.incidence() if inc is None else inc

        def count(label):
            return sum(1 for eid, _, _ in inc.get(element_id, ()) if g.edges[eid].type == label)
    elif element_id in g.edges:
        el, pool = g.edges[element_id], g.edges

        def count(label):
            raise EvaluationError("count() is only defined on nodes")
    else:
        raise EvaluationError(f"unknown element {element_id!r}")
    if el.type != c.scope:
        raise EvaluationError(f"element {element_id!r} has type {el.type!r}, constraint scoped to {c.scope!r}")
    ast = parse_constraint(c.expression)
    env = Env(el.properties, count, _uniqueness_probe(g, element_id, pool, el.type, ast))
    return evaluate(ast, env)


def _plain(v):
    return None if v is ABSENT else v


def _collect(node, cls) -> list:
    if isinstance(node, cls):
        return [node]
    if isinstance(node, BoolOp):
        return [x for item in node.items for x in _collect(item, cls)]
    if isinstance(node, Cmp):
        return _collect(node.left, cls) + _collect(node.right, cls)
    return []


# validation

def _check_node(g: TypedGraphInstance, nid: str, inc, out: list[Violation]) -> None:
    s = g.schema
    n = g.nodes[nid]
    nt = s.node_types.get(n.type)
    if nt is None:
        out.append(Violation("Untyped", nid, f"node type {n.type!r} is not in the schema"))
        return
    if nt.property_type in s.registry:
        for v in check_value(s.registry, nt.property_type, n.properties).violations:
            out.append(Violation("PropertyType", nid, f"{v.element}: {v.message}"))
    if nt.nested_schema is not None:
        inner = n.nested if n.nested is not None else TypedGraphInstance(nt.nested_schema)
        if inner.schema is not nt.nested_schema:
            inner = TypedGraphInstance(nt.nested_schema, inner.nodes, inner.edges)
        out.extend(v.prefixed(f"{nid}/") for v in validate_instance(inner).violations)
    elif n.nested is not None:
        out.append(Violation("UnexpectedNested", nid, f"node type {n.type!r} has no nested schema"))

    counts: dict[tuple[str, str, int], int] = defaultdict(int)
    for eid, side, pos in inc.get(nid, ()):
        counts[(g.edges[eid].type, side, pos)] += 1
    for et in s.edges_touching(n.type):
        for side, pos, p in et.ends:
            if p.node_type != n.type:
                continue
            c = counts.get((et.label, side, pos), 0)
            if not p.multiplicity.admits(c):
                role = f" role {p.role}" if p.role else ""
                out.append(Violation(
                    "Multiplicity", nid,
                    f"{n.type} participation in {et.label} {side}[{pos}]{role}: "
                    f"{c} not in {p.multiplicity}"))
    _check_constraints(g, nid, n.type, inc, out)


def _check_constraints(g, element_id, type_label, inc, out):
    for c in g.schema.constraints_for(type_label):
        try:
            ok = evaluate_constraint(g, c, element_id, inc)
        except (EvaluationError, TgmError) as exc:
            out.append(Violation("ConstraintError", element_id, f"{c.label}: {exc}"))
            continue
        if not ok:
            out.append(Violation("Constraint", element_id, f"{c.label}: {c.expression}"))


def _check_edge(g: TypedGraphInstance, eid: str, inc, out: list[Violation]) -> None:
    s = g.schema
    e = g.edges[eid]
    et = s.edge_types.get(e.type)
    if et is None:
        out.append(Violation("Untyped", eid, f"edge type {e.type!r} is not in the schema"))
        return
    if len(e.tails) != len(et.tail) or len(e.heads) != len(et.head):
        out.append(Violation("EdgeArity", eid,
                             f"{e.type} needs {len(et.tail)} tail(s) and {len(et.head)} head(s)"))
    for side, ids, parts in (("tail", e.tails, et.tail), ("head", e.heads, et.head)):
        for i, nid in enumerate(ids):
            node = g.nodes.get(nid)
            if node is None:
                out.append(Violation("DanglingEndpoint", eid, f"{side}[{i}] refers to missing node {nid!r}"))
            elif i < len(parts) and node.type != parts[i].node_type:
                out.append(Violation("EndpointType", eid,
                                     f"{side}[{i}] is a {node.type}, expected {parts[i].node_type}"))
    if et.property_type in s.registry:
        for v in check_value(s.registry, et.property_type, e.properties).violations:
            out.append(Violation("PropertyType", eid, f"{v.element}: {v.message}"))
    _check_constraints(g, eid, e.type, inc, out)


def _verdict(g: TypedGraphInstance, node_ids: Iterable[str], edge_ids: Iterable[str]) -> Verdict:
    inc = g.incidence()
    out: list[Violation] = []
    for nid in sorted(set(node_ids)):
        if nid in g.nodes:
            _check_node(g, nid, inc, out)
    for eid in sorted(set(edge_ids)):
        if eid in g.edges:
            _check_edge(g, eid, inc, out)
    return Verdict.of(out)


def validate_instance(g: TypedGraphInstance) -> Verdict:
    """Full check: typing, endpoints, multiplicities, property types, constraints, nesting."""
    return _verdict(g, g.nodes, g.edges)


# mutations

@dataclass(frozen=True)
class InsertNode:
    type: str
    properties: object = field(default_factory=dict)
    id: str | None = None
    nested: TypedGraphInstance | None = None


@dataclass(frozen=True)
class UpdateNode:
    id: str
    properties: object


@dataclass(frozen=True)
class DeleteNode:
    id: str


@dataclass(frozen=True)
class InsertEdge:
    type: str
    tails: Sequence[str]
    heads: Sequence[str]
    properties: object = field(default_factory=dict)
    id: str | None = None


@dataclass(frozen=True)
class UpdateEdge:
    id: str
    properties: object


@dataclass(frozen=True)
class DeleteEdge:
    id: str


Mutation = Union[InsertNode, UpdateNode, DeleteNode, InsertEdge, UpdateEdge, DeleteEdge]


@dataclass
class Staged:
    """A candidate post-state plus what the batch touched."""
    instance: TypedGraphInstance
    nodes: set[str]
    edges: set[str]
    errors: list[Violation]


def _fresh(prefix: str, taken, start: int) -> tuple[str, int]:
    k = start
    while f"{prefix}{k}" in taken:
        k += 1
    return f"{prefix}{k}", k + 1


def stage(g: TypedGraphInstance, ms: Sequence[Mutation]) -> Staged:
    """Apply ``ms`` to copies of g's maps, recording every touched element."""
    nodes = dict(g.nodes)
    edges = dict(g.edges)
    touched_n: set[str] = set()
    touched_e: set[str] = set()
    errors: list[Violation] = []
    next_n = len(nodes)
    next_e = len(edges)
    for i, m in enumerate(ms):
        where = f"mutation[{i}]"
        if isinstance(m, InsertNode):
            nid = m.id
            if nid is None:
                nid, next_n = _fresh("n", nodes, next_n)
            elif nid in nodes or nid in edges:
                errors.append(Violation("DuplicateId", where, f"id {nid!r} already in use"))
                continue
            nodes[nid] = InstanceNode(nid, m.type, m.properties, m.nested)
            touched_n.add(nid)
        elif isinstance(m, InsertEdge):
            eid = m.id
            if eid is None:
                eid, next_e = _fresh("e", edges, next_e)
            elif eid in edges or eid in nodes:
                errors.append(Violation("DuplicateId", where, f"id {eid!r} already in use"))
                continue
            edges[eid] = InstanceEdge(eid, m.type, tuple(m.tails), tuple(m.heads), m.properties)
            touched_e.add(eid)
            touched_n.update(m.tails)
            touched_n.update(m.heads)
        elif isinstance(m, (UpdateNode, DeleteNode)):
            if m.id not in nodes:
                errors.append(Violation("UnknownId", where, f"no node {m.id!r}"))
                continue
            old = nodes[m.id]
            if isinstance(m, UpdateNode):
                nodes[m.id] = InstanceNode(old.id, old.type, m.properties, old.nested)
            else:
                del nodes[m.id]
            touched_n.add(m.id)
        elif isinstance(m, (UpdateEdge, DeleteEdge)):
            if m.id not in edges:
                errors.append(Violation("UnknownId", where, f"no edge {m.id!r}"))
                continue
            old = edges[m.id]
            touched_n.update(old.endpoints)
            if isinstance(m, UpdateEdge):
                edges[m.id] = InstanceEdge(old.id, old.type, old.tails, old.heads, m.properties)
            else:
                del edges[m.id]
            touched_e.add(m.id)
        else:
            errors.append(Violation("UnknownMutation", where, type(m).__name__))
    return Staged(TypedGraphInstance(g.schema, nodes, edges), touched_n, touched_e, errors)


def revalidate(st: Staged) -> Verdict:
    """Validate only what a staged batch can have affected.

    Assumes the pre-state was valid.  Besides touched elements this covers
    edges left dangling by deleted nodes and, for types carrying ``unique``
    constraints, every peer of a touched element.
    """
    g = st.instance
    s = g.schema
    node_ids = set(st.nodes)
    edge_ids = set(st.edges)
    gone = {nid for nid in st.nodes if nid not in g.nodes}
    if gone:
        for eid, e in g.edges.items():
            if gone.intersection(e.endpoints):
                edge_ids.add(eid)
    unique_scopes = {c.scope for c in s.constraints.values()
                     if _collect(parse_constraint(c.expression), Unique)}
    if unique_scopes:
        hot = {g.nodes[n].type for n in node_ids if n in g.nodes} | \
              {g.edges[e].type for e in edge_ids if e in g.edges}
        # deleted elements free up values too, but cannot create a clash
        for t in hot & unique_scopes:
            node_ids.update(nid for nid, n in g.nodes.items() if n.type == t)
            edge_ids.update(eid for eid, e in g.edges.items() if e.type == t)
    return _verdict(g, node_ids, edge_ids)


def apply_mutations(g: TypedGraphInstance, ms: Sequence[Mutation]) -> tuple[TypedGraphInstance, Verdict]:
    """Commit the batch atomically.

    Returns ``(new_instance, ok_verdict)`` when the post-state validates, else
    ``(g, rejection)`` with g untouched and the full violation list.
    """
    st = stage(g, ms)
    verdict = revalidate(st).merge(Verdict.of(st.errors))
    if verdict.ok:
        return st.instance, verdict
    return g, verdict
