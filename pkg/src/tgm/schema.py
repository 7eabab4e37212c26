"""Typed graph schemas: node types, edge types, multiplicities and constraints."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .constraints import typecheck
from .datatypes import ANY_TYPE, TypeRegistry, UNBOUNDED
from .errors import ConstraintSyntaxError, EmptyInput, InvalidSchema, TgmError
from .verdict import Verdict, Violation

EDGE_KINDS = ("plain", "aggregation", "generalization", "composition")


def is_edge_kind(kind: str) -> bool:
    return kind in EDGE_KINDS or (kind.startswith("user:") and len(kind) > 5)


@dataclass(frozen=True)
class Multiplicity:
    min: int = 0
    max: int | str = UNBOUNDED

    @property
    def unbounded(self) -> bool:
        return self.max == UNBOUNDED

    def admits(self, n: int) -> bool:
        return n >= self.min and (self.unbounded or n <= self.max)

    def contains(self, other: Multiplicity) -> bool:
        """Interval containment: every count admitted by ``other`` is admitted here."""
        if other.min < self.min:
            return False
        if self.unbounded:
            return True
        return not other.unbounded and other.max <= self.max

    def problems(self) -> list[str]:
        out = []
        if not isinstance(self.min, int) or isinstance(self.min, bool) or self.min < 0:
            out.append(f"min {self.min!r} must be a non-negative integer")
        if self.max != UNBOUNDED:
            if not isinstance(self.max, int) or isinstance(self.max, bool) or self.max < 1:
                out.append(f"max {self.max!r} must be a positive integer or '*'")
            elif isinstance(self.min, int) and self.min > self.max:
                out.append(f"min {self.min} exceeds max {self.max}")
        return out

    def __str__(self) -> str:
        return f"{self.min}..{self.max}"

    @classmethod
    def parse(cls, text: str) -> Multiplicity:
        lo, _, hi = text.partition("..")
        hi = hi or lo
        return cls(int(lo), hi if hi == UNBOUNDED else int(hi))


ONE = Multiplicity(1, 1)
OPTIONAL_ONE = Multiplicity(0, 1)
MANY = Multiplicity(0, UNBOUNDED)


def most_general_multiplicity(ms: Iterable[Multiplicity]) -> Multiplicity:
    """Tightest multiplicity covering every input interval."""
    ms = list(ms)
    if not ms:
        raise EmptyInput("most_general_multiplicity needs at least one multiplicity")
    lo = min(m.min for m in ms)
    if any(m.unbounded for m in ms):
        return Multiplicity(lo, UNBOUNDED)
    return Multiplicity(lo, max(m.max for m in ms))


@dataclass(frozen=True)
class Participation:
    node_type: str
    multiplicity: Multiplicity = MANY
    role: str | None = None

    def to_json(self) -> dict:
        out = {"node": self.node_type, "min": self.multiplicity.min, "max": self.multiplicity.max}
        if self.role is not None:
            out["role"] = self.role
        return out

    @classmethod
    def from_json(cls, d: Mapping) -> Participation:
        return cls(d["node"], Multiplicity(d.get("min", 0), d.get("max", UNBOUNDED)), d.get("role"))


@dataclass(frozen=True)
class NodeType:
    label: str
    property_type: str
    nested_schema: TypedGraphSchema | None = None


@dataclass(frozen=True)
class EdgeType:
    label: str
    property_type: str
    kind: str
    tail: tuple[Participation, ...]
    head: tuple[Participation, ...]

    @property
    def ends(self) -> list[tuple[str, int, Participation]]:
        """All participations as (side, position, participation)."""
        return [("tail", i, p) for i, p in enumerate(self.tail)] + \
               [("head", i, p) for i, p in enumerate(self.head)]

    def node_types(self) -> set[str]:
        return {p.node_type for p in self.tail + self.head}


@dataclass(frozen=True)
class Constraint:
    label: str
    scope: str
    expression: str


@dataclass(frozen=True)
class TypedGraphSchema:
    registry: TypeRegistry = field(default_factory=TypeRegistry)
    node_types: Mapping[str, NodeType] = field(default_factory=dict)
    edge_types: Mapping[str, EdgeType] = field(default_factory=dict)
    constraints: Mapping[str, Constraint] = field(default_factory=dict)

    @classmethod
    def build(cls, registry: TypeRegistry | None = None, nodes: Iterable[NodeType] = (),
              edges: Iterable[EdgeType] = (), constraints: Iterable[Constraint] = ()) -> TypedGraphSchema:
        return cls(registry or TypeRegistry(),
                   {n.label: n for n in nodes},
                   {e.label: e for e in edges},
                   {c.label: c for c in constraints})

    def with_(self, **changes) -> TypedGraphSchema:
        return replace(self, **changes)

    def constraints_for(self, scope: str) -> list[Constraint]:
        return [self.constraints[k] for k in sorted(self.constraints) if self.constraints[k].scope == scope]

    def edges_touching(self, node_label: str) -> list[EdgeType]:
        return [self.edge_types[k] for k in sorted(self.edge_types)
                if node_label in self.edge_types[k].node_types()]

    # serialization

    def to_json(self) -> dict:
        return {
            "types": self.registry.to_json(),
            "nodes": [_node_json(self.node_types[k]) for k in sorted(self.node_types)],
            "edges": [_edge_json(self.edge_types[k]) for k in sorted(self.edge_types)],
            "constraints": [{"label": c.label, "scope": c.scope, "expr": c.expression}
                            for c in (self.constraints[k] for k in sorted(self.constraints))],
        }

    def canonical(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)

    @classmethod
    def from_json(cls, d: Mapping, registry: TypeRegistry | None = None) -> TypedGraphSchema:
        reg = registry if registry is not None else TypeRegistry()
        if d.get("types"):
            from .datatypes import DataType
            reg = reg.register(*(DataType.from_json(t) for t in d["types"]))
        nodes = []
        for n in d.get("nodes", []):
            nested = n.get("nested")
            nodes.append(NodeType(n["label"], n.get("properties", "Empty"),
                                  cls.from_json(nested, reg) if nested is not None else None))
        edges = [EdgeType(e["label"], e.get("properties", "Empty"), e.get("kind", "plain"),
                          tuple(Participation.from_json(p) for p in e.get("tail", [])),
                          tuple(Participation.from_json(p) for p in e.get("head", [])))
                 for e in d.get("edges", [])]
        cons = [Constraint(c["label"], c["scope"], c["expr"]) for c in d.get("constraints", [])]
        return cls.build(reg, nodes, edges, cons)


def _node_json(n: NodeType) -> dict:
    out = {"label": n.label, "properties": n.property_type}
    if n.nested_schema is not None:
        nested = n.nested_schema.to_json()
        nested.pop("types")
        out["nested"] = nested
    return out


def _edge_json(e: EdgeType) -> dict:
    return {"label": e.label, "kind": e.kind, "properties": e.property_type,
            "tail": [p.to_json() for p in e.tail], "head": [p.to_json() for p in e.head]}


def _contained_labels(s: TypedGraphSchema) -> set[str]:
    out = set()
    for n in s.node_types.values():
        out.add(n.label)
        if n.nested_schema is not None:
            out |= _contained_labels(n.nested_schema)
    return out


def validate_schema(s: TypedGraphSchema) -> Verdict:
    """Check every well-formedness rule of a typed graph schema."""
    out: list[Violation] = []
    warn: list[Violation] = []
    reg = s.registry

    for label in sorted(set(s.node_types) & set(s.edge_types)):
        out.append(Violation("AmbiguousLabel", label, "label names both a node type and an edge type"))

    def check_props(owner: str, type_label: str):
        t = reg.get(type_label)
        if t is None:
            out.append(Violation("DanglingType", owner, f"unknown property type {type_label!r}"))
        elif t.kind != "record":
            out.append(Violation("PropertyTypeNotRecord", owner, f"{type_label!r} is a {t.kind}, not a record"))
        elif ANY_TYPE in reg.reachable(type_label):
            warn.append(Violation("WeakType", owner, f"{type_label!r} uses anyType"))

    for label in sorted(s.node_types):
        n = s.node_types[label]
        if n.label != label:
            out.append(Violation("LabelMismatch", label, f"keyed as {label!r} but labelled {n.label!r}"))
        check_props(label, n.property_type)
        if n.nested_schema is not None:
            if label in _contained_labels(n.nested_schema):
                out.append(Violation("CyclicContainment", label, "node type contains itself"))
            inner = validate_schema(n.nested_schema)
            out.extend(v.prefixed(f"{label}/") for v in inner.violations)
            warn.extend(v.prefixed(f"{label}/") for v in inner.warnings)

    for label in sorted(s.edge_types):
        e = s.edge_types[label]
        check_props(label, e.property_type)
        if not is_edge_kind(e.kind):
            out.append(Violation("UnknownEdgeKind", label, f"unknown edge kind {e.kind!r}"))
        if not e.tail or not e.head:
            out.append(Violation("EmptyEnd", label, "tail and head must both be non-empty"))
        if e.kind == "generalization":
            if len(e.tail) != 1 or len(e.head) != 1:
                out.append(Violation("GeneralizationShape", label, "generalization edges are binary"))
            t = reg.get(e.property_type)
            if t is not None and t.kind == "record" and t.components:
                out.append(Violation("GeneralizationShape", label, "generalization edges carry no properties"))
        for side, parts in (("tail", e.tail), ("head", e.head)):
            seen = set()
            for i, p in enumerate(parts):
                where = f"{label}.{side}[{i}]"
                if p.node_type not in s.node_types:
                    out.append(Violation("DanglingNodeType", where, f"unknown node type {p.node_type!r}"))
                for problem in p.multiplicity.problems():
                    rule = "MinExceedsMax" if "exceeds" in problem else "InvalidMultiplicity"
                    out.append(Violation(rule, where, problem))
                key = (p.node_type, p.role)
                if key in seen:
                    out.append(Violation("DuplicateParticipation", where,
                                         f"{p.node_type} appears twice on the {side} without distinct roles"))
                seen.add(key)

    for label in sorted(s.constraints):
        c = s.constraints[label]
        if c.scope in s.node_types:
            rec, is_node = s.node_types[c.scope].property_type, True
        elif c.scope in s.edge_types:
            rec, is_node = s.edge_types[c.scope].property_type, False
        else:
            out.append(Violation("DanglingScope", label, f"constraint scope {c.scope!r} is not a type"))
            continue
        if rec not in reg:
            continue
        try:
            typecheck(c.expression, reg, rec, is_node=is_node, edge_labels=list(s.edge_types))
        except (ConstraintSyntaxError, TgmError) as exc:
            out.append(Violation("ConstraintInvalid", label, str(exc)))

    return Verdict.of(out, warn)


def require_valid(s: TypedGraphSchema) -> TypedGraphSchema:
    verdict = validate_schema(s)
    if not verdict.ok:
        raise InvalidSchema(verdict)
    return s


def schema_equals(a: TypedGraphSchema, b: TypedGraphSchema) -> bool:
    """True iff both (valid) schemas have byte-identical canonical serializations."""
    require_valid(a)
    require_valid(b)
    return a.canonical() == b.canonical()


def load_schema(path) -> TypedGraphSchema:
    with open(path, encoding="utf-8") as fh:
        return TypedGraphSchema.from_json(json.load(fh))


def dump_schema(s: TypedGraphSchema, path=None, extra: Mapping | None = None) -> str:
    doc = s.to_json()
    if extra:
        doc.update(extra)
    text = json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
