"""Supermodel intermediate representation and its translation to typed graph schemas.

Five meta-constructs describe any source schema:

``lexical``
    a typed value; payload ``{type, key?, alternatives?}``.
``abstract``
    a thing with identity; no payload.
``aggregation``
    either a *relationship* over abstracts (payload ``members`` with
    ``{ref, min, max, role?}``) or a *structured value* over lexicals
    (all members lexical, payload also names the record ``type``).
``generalization``
    ``{sub, super}`` between abstracts.
``function``
    ``{source, target, optional?, role?}``.  A function into an abstract is a
    single-valued reference; a function into a lexical or structured
    aggregation attaches that value to its owner (an abstract or a
    relationship) as a named property.

``translate`` applies one elementary transformation per element:

=====  ===============  ==============================================
rule   element          produced
=====  ===============  ==============================================
1      lexical          a record component (``property:Owner.name``)
2      abstract         a node type (``node:A``)
3      aggregation      an aggregation edge (``edge:R``) or a record
                        data type (``type:T@Owner.name``)
4      generalization   a generalization edge (``edge:G``)
5      function         a single-target edge (``edge:F``) or a property
                        binding with its multiplicity (``attribute:Owner.name``)
=====  ===============  ==============================================

``translate_inverse`` reads the same shapes back; the optional report
restores element ids, declaration order and the lexical/structured choice
for record-typed properties.
"""

from __future__ import annotations

import heapq
import json
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .datatypes import (COLLECTION_KINDS, EMPTY, PRIMITIVES, DataType, TypeRegistry, array_of, collection,
                        enum_of, optional_of, range_of, record)
from .errors import (CyclicDependency, MalformedSupermodel, MapperUnavailable, NotInImage, SupermodelError,
                     TgmError, UnknownKind)
from .instance import TypedGraphInstance, validate_instance
from .schema import (Constraint, EdgeType, Multiplicity, NodeType, Participation, TypedGraphSchema,
                     validate_schema)
from .verdict import Verdict, Violation

META_KINDS = ("lexical", "abstract", "aggregation", "generalization", "function")

RULE_LEXICAL, RULE_ABSTRACT, RULE_AGGREGATION, RULE_GENERALIZATION, RULE_FUNCTION = 1, 2, 3, 4, 5
_RULE_OF = {"lexical": 1, "abstract": 2, "aggregation": 3, "generalization": 4, "function": 5}

SUB_END = Multiplicity(1, 1)
SUPER_END = Multiplicity(0, 1)
FUNCTION_TARGET_END = Multiplicity(0, "*")


@dataclass(frozen=True)
class MetaElement:
    id: str
    kind: str
    label: str
    payload: Mapping = field(default_factory=dict, compare=False, hash=False)

    def canonical_payload(self) -> dict:
        """Payload with defaults dropped, so equal meaning means equal encoding."""
        p = dict(self.payload)
        out: dict = {}
        if self.kind == "lexical":
            out["type"] = p["type"]
            for flag in ("key", "alternatives"):
                if p.get(flag):
                    out[flag] = True
        elif self.kind == "aggregation":
            out["members"] = [_member(m) for m in p.get("members", [])]
            if p.get("type") is not None:
                out["type"] = p["type"]
        elif self.kind == "generalization":
            out = {"sub": p["sub"], "super": p["super"]}
        elif self.kind == "function":
            out = {"source": p["source"], "target": p["target"]}
            if p.get("optional"):
                out["optional"] = True
            if p.get("role") is not None:
                out["role"] = p["role"]
        return out

    def references(self) -> list[str]:
        p = self.payload
        if self.kind == "aggregation":
            return [m["ref"] for m in p.get("members", [])]
        if self.kind == "generalization":
            return [p["sub"], p["super"]]
        if self.kind == "function":
            return [p["source"], p["target"]]
        return []

    def to_json(self) -> dict:
        return {"id": self.id, "kind": self.kind, "label": self.label, **self.canonical_payload()}

    @classmethod
    def from_json(cls, d: Mapping) -> MetaElement:
        payload = {k: v for k, v in d.items() if k not in ("id", "kind", "label")}
        return cls(d["id"], d["kind"], d["label"], payload)


def _member(m: Mapping) -> dict:
    out = {"ref": m["ref"], "min": m.get("min", 0), "max": m.get("max", "*")}
    if m.get("role") is not None:
        out["role"] = m["role"]
    return out


@dataclass(frozen=True)
class SupermodelSchema:
    elements: tuple[MetaElement, ...] = ()
    source_model: str = "supermodel"
    types: TypeRegistry = field(default_factory=TypeRegistry)

    def by_id(self) -> dict[str, MetaElement]:
        return {e.id: e for e in self.elements}

    def to_json(self) -> dict:
        return {"source_model": self.source_model, "types": self.types.to_json(),
                "elements": [e.to_json() for e in self.elements]}

    def canonical(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)

    @classmethod
    def from_json(cls, d: Mapping) -> SupermodelSchema:
        return cls(tuple(MetaElement.from_json(e) for e in d.get("elements", [])),
                   d.get("source_model", "supermodel"), TypeRegistry.from_json(d.get("types", [])))


def load_supermodel(path) -> SupermodelSchema:
    with open(path, encoding="utf-8") as fh:
        return SupermodelSchema.from_json(json.load(fh))


def dump_supermodel(sm: SupermodelSchema, path=None) -> str:
    text = json.dumps(sm.to_json(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def supermodel_equals(a: SupermodelSchema, b: SupermodelSchema) -> bool:
    """Byte equality of canonical forms (ids, declaration order, normalized payloads)."""
    return a.canonical() == b.canonical()


def supermodel_diff(a: SupermodelSchema, b: SupermodelSchema) -> list[Violation]:
    """Human-readable differences between two supermodel schemas."""
    out = []
    if a.source_model != b.source_model:
        out.append(Violation("SourceModel", "-", f"{a.source_model!r} vs {b.source_model!r}"))
    ta, tb = {t["label"]: t for t in a.types.to_json()}, {t["label"]: t for t in b.types.to_json()}
    for label in sorted(set(ta) | set(tb)):
        if ta.get(label) != tb.get(label):
            out.append(Violation("TypeDiff", label, f"{ta.get(label)} vs {tb.get(label)}"))
    ea, eb = a.by_id(), b.by_id()
    for eid in sorted(set(ea) - set(eb)):
        out.append(Violation("MissingElement", eid, "only in the first schema"))
    for eid in sorted(set(eb) - set(ea)):
        out.append(Violation("ExtraElement", eid, "only in the second schema"))
    for eid in sorted(set(ea) & set(eb)):
        if ea[eid].to_json() != eb[eid].to_json():
            out.append(Violation("ElementDiff", eid, f"{ea[eid].to_json()} vs {eb[eid].to_json()}"))
    if not out and [e.id for e in a.elements] != [e.id for e in b.elements]:
        out.append(Violation("OrderDiff", "-", "same elements in a different declaration order"))
    return out


# translation report

@dataclass(frozen=True)
class TranslationStep:
    element: str
    rule: int
    produced: str
    position: int

    def to_json(self) -> dict:
        return {"element": self.element, "rule": self.rule, "produced": self.produced, "position": self.position}


@dataclass(frozen=True)
class TranslationReport:
    steps: tuple[TranslationStep, ...] = ()
    source_model: str = "supermodel"

    def to_json(self) -> dict:
        return {"source_model": self.source_model, "steps": [s.to_json() for s in self.steps]}

    @classmethod
    def from_json(cls, d: Mapping) -> TranslationReport:
        return cls(tuple(TranslationStep(s["element"], int(s["rule"]), s["produced"], int(s.get("position", i)))
                         for i, s in enumerate(d.get("steps", []))),
                   d.get("source_model", "supermodel"))


def load_report(path) -> TranslationReport:
    with open(path, encoding="utf-8") as fh:
        return TranslationReport.from_json(json.load(fh))


# well-formedness

@dataclass
class _Analysis:
    """Roles each element plays, derived once and shared by checking and translation."""
    by_id: dict[str, MetaElement]
    index: dict[str, int]
    relationships: set[str] = field(default_factory=set)
    structured: set[str] = field(default_factory=set)
    attachments: set[str] = field(default_factory=set)
    edge_functions: set[str] = field(default_factory=set)
    owner_of: dict[str, str] = field(default_factory=dict)  # attached value id -> owner id
    attach_of: dict[str, str] = field(default_factory=dict)  # attached value id -> function id
    member_of: dict[str, str] = field(default_factory=dict)  # lexical id -> structured aggregation id
    problems: list[str] = field(default_factory=list)


def _analyse(sm: SupermodelSchema) -> _Analysis:
    by_id: dict[str, MetaElement] = {}
    problems = []
    for e in sm.elements:
        if e.kind not in META_KINDS:
            raise UnknownKind(f"element {e.id!r} has unknown kind {e.kind!r}")
        if e.id in by_id:
            problems.append(f"duplicate element id {e.id!r}")
        by_id[e.id] = e
        if not e.label:
            problems.append(f"element {e.id!r} has no label")
    a = _Analysis(by_id, {e.id: i for i, e in enumerate(sm.elements)}, problems=problems)

    def kind(ref):
        el = by_id.get(ref)
        return el.kind if el else None

    for e in sm.elements:
        for ref in e.references():
            if ref not in by_id:
                problems.append(f"{e.id!r} references unknown element {ref!r}")
    if problems:
        return a

    for e in sm.elements:
        p = e.payload
        if e.kind == "lexical":
            if p.get("type") not in sm.types:
                problems.append(f"lexical {e.id!r} has unknown type {p.get('type')!r}")
            elif p.get("alternatives") and sm.types[sm.types.resolve_optional(p["type"])].kind not in COLLECTION_KINDS:
                problems.append(f"lexical {e.id!r} marks alternatives but is not a collection")
        elif e.kind == "aggregation":
            members = p.get("members", [])
            kinds = {kind(m["ref"]) for m in members}
            if not members:
                problems.append(f"aggregation {e.id!r} has no members")
            elif kinds == {"lexical"}:
                a.structured.add(e.id)
                if not p.get("type"):
                    problems.append(f"structured aggregation {e.id!r} names no record type")
                for m in members:
                    ok = m.get("min", 0) in (0, 1) and m.get("max", "*") == 1
                    if not ok:
                        problems.append(f"structured aggregation {e.id!r}: member {m['ref']!r} must be 0..1 or 1..1")
                    if m["ref"] in a.member_of:
                        problems.append(f"lexical {m['ref']!r} belongs to two structured aggregations")
                    a.member_of[m["ref"]] = e.id
            elif kinds == {"abstract"}:
                a.relationships.add(e.id)
                if len(members) < 2:
                    problems.append(f"relationship {e.id!r} needs at least two members")
                if p.get("type") is not None:
                    problems.append(f"relationship {e.id!r} cannot name a record type")
                seen = set()
                for i, m in enumerate(members):
                    mult = Multiplicity(m.get("min", 0), m.get("max", "*"))
                    for problem in mult.problems():
                        problems.append(f"relationship {e.id!r} member {i}: {problem}")
                    key = (i == 0, m["ref"], m.get("role"))
                    if key in seen:
                        problems.append(f"relationship {e.id!r} repeats {m['ref']!r} without distinct roles")
                    seen.add(key)
            else:
                problems.append(f"aggregation {e.id!r} mixes member kinds {sorted(map(str, kinds))}")
        elif e.kind == "generalization":
            if kind(p["sub"]) != "abstract" or kind(p["super"]) != "abstract":
                problems.append(f"generalization {e.id!r} must link two abstracts")
            elif p["sub"] == p["super"]:
                problems.append(f"generalization {e.id!r} links an abstract to itself")

    for e in sm.elements:
        if e.kind != "function":
            continue
        src, tgt = e.payload["source"], e.payload["target"]
        if kind(tgt) == "lexical" or tgt in a.structured:
            a.attachments.add(e.id)
            if not (kind(src) == "abstract" or src in a.relationships):
                problems.append(f"function {e.id!r} attaches a value to something that is not an abstract "
                                "or relationship")
            if e.label != by_id[tgt].label:
                problems.append(f"attaching function {e.id!r} must carry its target's label")
            if tgt in a.owner_of:
                problems.append(f"value {tgt!r} is attached twice")
            if e.payload.get("role") is not None:
                problems.append(f"attaching function {e.id!r} cannot have a role")
            a.owner_of[tgt] = src
            a.attach_of[tgt] = e.id
        elif kind(tgt) == "abstract" and kind(src) == "abstract":
            a.edge_functions.add(e.id)
        else:
            problems.append(f"function {e.id!r} has an unsupported shape {kind(src)}->{kind(tgt)}")
    for e in sm.elements:
        if e.kind == "lexical":
            placed = (e.id in a.owner_of) + (e.id in a.member_of)
            if placed != 1:
                problems.append(f"lexical {e.id!r} must be attached exactly once or be a structured member")
            if e.payload.get("key") and by_id.get(a.owner_of.get(e.id), e).kind != "abstract":
                problems.append(f"key lexical {e.id!r} must be attached to an abstract")
            if e.payload.get("alternatives") and e.id in a.member_of:
                problems.append(f"lexical {e.id!r}: alternatives cannot sit inside a structured value")
        if e.id in a.structured and e.id not in a.owner_of:
            problems.append(f"structured aggregation {e.id!r} is never attached")

    # label uniqueness among produced schema elements
    node_labels = [e.label for e in sm.elements if e.kind == "abstract"]
    edge_labels = [e.label for e in sm.elements
                   if e.id in a.relationships or e.kind == "generalization" or e.id in a.edge_functions]
    for label in sorted({x for x in node_labels if node_labels.count(x) > 1}):
        problems.append(f"abstract label {label!r} is not unique")
    for label in sorted({x for x in edge_labels if edge_labels.count(x) > 1}):
        problems.append(f"edge label {label!r} is not unique")
    for label in sorted(set(node_labels) & set(edge_labels)):
        problems.append(f"label {label!r} names both an abstract and an edge")
    names: dict[tuple[str, str], str] = {}
    for tgt, owner in a.owner_of.items():
        key = (owner, by_id[tgt].label)
        if key in names:
            problems.append(f"{by_id[owner].label!r} has two properties named {key[1]!r}")
        names[key] = tgt
    for agg in a.structured:
        labels = [by_id[m["ref"]].label for m in by_id[agg].payload["members"]]
        if len(set(labels)) != len(labels):
            problems.append(f"structured aggregation {agg!r} repeats a member label")

    # IS-A must be acyclic
    parents: dict[str, list[str]] = {}
    for e in sm.elements:
        if e.kind == "generalization":
            parents.setdefault(e.payload["sub"], []).append(e.payload["super"])
    state: dict[str, int] = {}

    def visit(n):
        state[n] = 1
        for p in parents.get(n, []):
            if state.get(p) == 1:
                raise CyclicDependency(f"generalization cycle through {by_id[p].label!r}")
            if p not in state:
                visit(p)
        state[n] = 2

    for n in sorted(parents):
        if n not in state:
            visit(n)
    return a


def check_supermodel(sm: SupermodelSchema) -> list[str]:
    """Well-formedness problems of ``sm`` (empty when well-formed)."""
    return _analyse(sm).problems


# translation

def _owner_record(owner: MetaElement, a: _Analysis) -> str:
    return f"{owner.label}_props" if owner.kind == "abstract" else f"{owner.label}_eprops"


def _produced(e: MetaElement, a: _Analysis) -> str:
    by = a.by_id
    if e.kind == "abstract":
        return f"node:{e.label}"
    if e.id in a.relationships or e.kind == "generalization" or e.id in a.edge_functions:
        return f"edge:{e.label}"
    if e.id in a.attachments:
        return f"attribute:{by[e.payload['source']].label}.{e.label}"
    if e.id in a.structured:
        owner = by[a.owner_of[e.id]]
        return f"type:{e.payload['type']}@{owner.label}.{e.label}"
    if e.kind == "lexical":
        if e.id in a.member_of:
            agg = by[a.member_of[e.id]]
            owner = by[a.owner_of[agg.id]]
            return f"property:{owner.label}.{agg.label}.{e.label}"
        return f"property:{by[a.owner_of[e.id]].label}.{e.label}"
    raise UnknownKind(e.kind)


def _topological(sm: SupermodelSchema, a: _Analysis) -> list[MetaElement]:
    deps = {e.id: set(e.references()) for e in sm.elements}
    users: dict[str, list[str]] = {}
    for eid, ds in deps.items():
        for d in ds:
            users.setdefault(d, []).append(eid)
    waiting = {eid: len(ds) for eid, ds in deps.items()}
    heap = [(a.index[eid], eid) for eid, n in waiting.items() if n == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        _, eid = heapq.heappop(heap)
        out.append(a.by_id[eid])
        for u in users.get(eid, []):
            waiting[u] -= 1
            if waiting[u] == 0:
                heapq.heappush(heap, (a.index[u], u))
    if len(out) != len(sm.elements):
        stuck = sorted(eid for eid, n in waiting.items() if n > 0)
        raise CyclicDependency(f"elements depend on each other cyclically: {', '.join(stuck)}")
    return out


def translate(sm: SupermodelSchema) -> tuple[TypedGraphSchema, TranslationReport]:
    """Map a well-formed supermodel schema to a typed graph schema, one step per element."""
    a = _analyse(sm)
    if a.problems:
        raise MalformedSupermodel(a.problems)
    by = a.by_id
    order = _topological(sm, a)

    records: dict[str, list[tuple[str, str]]] = {}   # record label -> components, in step order
    struct_types: dict[str, str] = {}                  # structured aggregation id -> record label
    wrappers: set[str] = set()
    nodes: list[NodeType] = []
    edges: list[EdgeType] = []
    steps: list[TranslationStep] = []

    def value_type(value_id: str) -> str:
        v = by[value_id]
        return v.payload["type"] if v.kind == "lexical" else struct_types[value_id]

    for e in order:
        steps.append(TranslationStep(e.id, _RULE_OF[e.kind], _produced(e, a), a.index[e.id]))
        p = e.payload
        if e.kind == "abstract":
            records.setdefault(f"{e.label}_props", [])
            nodes.append(NodeType(e.label, f"{e.label}_props"))
        elif e.id in a.relationships:
            members = [Participation(by[m["ref"]].label, Multiplicity(m.get("min", 0), m.get("max", "*")),
                                     m.get("role")) for m in p["members"]]
            records.setdefault(f"{e.label}_eprops", [])
            edges.append(EdgeType(e.label, f"{e.label}_eprops", "aggregation", tuple(members[:1]),
                                  tuple(members[1:])))
        elif e.id in a.structured:
            comps = []
            for m in p["members"]:
                lex = by[m["ref"]]
                t = lex.payload["type"]
                if m.get("min", 0) == 0:
                    wrappers.add(t)
                    t = f"{t}?"
                comps.append((lex.label, t))
            struct_types[e.id] = p["type"]
            existing = records.get(p["type"])
            if existing is not None and existing != comps:
                raise MalformedSupermodel([f"record type {p['type']!r} is built with two different shapes"])
            records[p["type"]] = comps
        elif e.kind == "generalization":
            edges.append(EdgeType(e.label, EMPTY, "generalization",
                                  (Participation(by[p["sub"]].label, SUB_END),),
                                  (Participation(by[p["super"]].label, SUPER_END),)))
        elif e.id in a.edge_functions:
            src_end = Multiplicity(0, 1) if p.get("optional") else Multiplicity(1, 1)
            edges.append(EdgeType(e.label, EMPTY, "plain",
                                  (Participation(by[p["source"]].label, src_end, p.get("role")),),
                                  (Participation(by[p["target"]].label, FUNCTION_TARGET_END),)))
        elif e.id in a.attachments:
            owner = by[p["source"]]
            t = value_type(p["target"])
            if p.get("optional"):
                wrappers.add(t)
                t = f"{t}?"
            records[_owner_record(owner, a)].append((e.label, t))
        # lexicals contribute through the step that places them (member or attachment)

    generated = [record(label, comps) for label, comps in records.items()]
    generated += [optional_of(f"{t}?", t) for t in sorted(wrappers)]
    clash = sorted(t.label for t in generated if t.label in sm.types and sm.types[t.label] != t)
    if clash:
        raise MalformedSupermodel([f"generated type {c!r} collides with a declared type" for c in clash])
    reg = sm.types.register(*generated)

    constraints = []
    for e in sm.elements:
        if e.kind != "abstract":
            continue
        keys = [by[v].label for v in _attached_in_order(e.id, a, order) if by[v].payload.get("key")]
        if keys:
            constraints.append(Constraint(f"key:{e.label}", e.label, f"unique({', '.join(keys)})"))
    for e in order:
        if e.kind == "lexical" and e.payload.get("alternatives"):
            owner = by[a.owner_of[e.id]]
            constraints.append(Constraint(f"xor:{owner.label}.{e.label}", owner.label, f"xor({e.label})"))
    tgs = TypedGraphSchema.build(reg, nodes, edges, constraints)
    return tgs, TranslationReport(tuple(steps), sm.source_model)


def _attached_in_order(owner_id: str, a: _Analysis, order: Sequence[MetaElement]) -> list[str]:
    return [e.payload["target"] for e in order if e.id in a.attachments and e.payload["source"] == owner_id]


# inverse

@dataclass
class _Piece:
    produced: str
    kind: str
    label: str
    payload: dict
    rule: int


def _split_optional(reg: TypeRegistry, t: str) -> tuple[str, bool]:
    d = reg.get(t)
    if d is not None and d.kind == "optional" and t == f"{d.element}?":
        return d.element, True
    return t, False


def translate_inverse(t: TypedGraphSchema, r: TranslationReport | None = None,
                      source_model: str | None = None) -> SupermodelSchema:
    """Read a typed graph schema back into supermodel elements.

    Without a report, ids are the produced labels and record-typed properties
    are read as structured aggregations.  Raises NotInImage for schema
    elements no elementary transformation produces.
    """
    reg = t.registry
    rule_of = {s.produced: s.rule for s in r.steps} if r is not None else {}
    pieces: list[_Piece] = []
    generated: set[str] = set()
    keys: dict[str, list[str]] = {}
    alts: set[tuple[str, str]] = set()

    for c in t.constraints.values():
        if c.label == f"key:{c.scope}" and c.expression.startswith("unique(") and c.scope in t.node_types:
            keys[c.scope] = [x.strip() for x in c.expression[len("unique("):-1].split(",")]
        elif c.label.startswith("xor:") and c.expression == f"xor({c.label.rsplit('.', 1)[-1]})":
            alts.add((c.scope, c.label.rsplit(".", 1)[-1]))
        else:
            raise NotInImage(f"constraint {c.label!r} is not produced by any elementary transformation")

    def add_values(owner_label: str, rec_label: str, is_node: bool):
        rec = reg.get(rec_label)
        if rec is None or rec.kind != "record":
            raise NotInImage(f"{owner_label}: property type {rec_label!r} is not a generated record")
        generated.add(rec_label)
        for name, ctype in rec.components:
            base, optional = _split_optional(reg, ctype)
            if optional:
                generated.add(ctype)
            attr = f"attribute:{owner_label}.{name}"
            bd = reg.get(base)
            as_lexical = (rule_of.get(f"property:{owner_label}.{name}") == RULE_LEXICAL
                          or (is_node and name in keys.get(owner_label, ())))
            if bd is not None and bd.kind == "record" and not as_lexical and base not in PRIMITIVES:
                struct = f"type:{base}@{owner_label}.{name}"
                generated.add(base)
                members = []
                for mname, mtype in bd.components:
                    mbase, mopt = _split_optional(reg, mtype)
                    if mopt:
                        generated.add(mtype)
                    lex = f"property:{owner_label}.{name}.{mname}"
                    pieces.append(_Piece(lex, "lexical", mname, {"type": mbase}, RULE_LEXICAL))
                    members.append({"ref": lex, "min": 0 if mopt else 1, "max": 1})
                pieces.append(_Piece(struct, "aggregation", name, {"members": members, "type": base},
                                     RULE_AGGREGATION))
                target = struct
            else:
                target = f"property:{owner_label}.{name}"
                payload = {"type": base}
                if is_node and name in keys.get(owner_label, ()):
                    payload["key"] = True
                if (owner_label, name) in alts:
                    payload["alternatives"] = True
                pieces.append(_Piece(target, "lexical", name, payload, RULE_LEXICAL))
            owner_ref = f"node:{owner_label}" if is_node else f"edge:{owner_label}"
            pieces.append(_Piece(attr, "function", name,
                                 {"source": owner_ref, "target": target, "optional": optional}, RULE_FUNCTION))

    for label in sorted(t.node_types):
        n = t.node_types[label]
        if n.nested_schema is not None:
            raise NotInImage(f"hyper-node {label!r} with a nested schema has no supermodel counterpart")
        if n.property_type != f"{label}_props":
            raise NotInImage(f"node {label!r} does not use its generated record {label}_props")
        pieces.append(_Piece(f"node:{label}", "abstract", label, {}, RULE_ABSTRACT))
        add_values(label, n.property_type, True)

    for label in sorted(t.edge_types):
        e = t.edge_types[label]
        ref = f"edge:{label}"
        if e.kind == "aggregation":
            if len(e.tail) != 1 or e.property_type != f"{label}_eprops":
                raise NotInImage(f"aggregation edge {label!r} is not in the shape translate produces")
            members = []
            for p in e.tail + e.head:
                m = {"ref": f"node:{p.node_type}", "min": p.multiplicity.min, "max": p.multiplicity.max}
                if p.role is not None:
                    m["role"] = p.role
                members.append(m)
            pieces.append(_Piece(ref, "aggregation", label, {"members": members}, RULE_AGGREGATION))
            add_values(label, e.property_type, False)
        elif e.kind == "generalization":
            ok = (len(e.tail) == 1 and len(e.head) == 1 and e.property_type == EMPTY
                  and e.tail[0].multiplicity == SUB_END and e.head[0].multiplicity == SUPER_END
                  and e.tail[0].role is None and e.head[0].role is None)
            if not ok:
                raise NotInImage(f"generalization edge {label!r} is not in the shape translate produces")
            pieces.append(_Piece(ref, "generalization", label,
                                 {"sub": f"node:{e.tail[0].node_type}", "super": f"node:{e.head[0].node_type}"},
                                 RULE_GENERALIZATION))
        elif e.kind == "plain":
            ok = (len(e.tail) == 1 and len(e.head) == 1 and e.property_type == EMPTY
                  and e.tail[0].multiplicity in (Multiplicity(1, 1), Multiplicity(0, 1))
                  and e.head[0].multiplicity == FUNCTION_TARGET_END and e.head[0].role is None)
            if not ok:
                raise NotInImage(f"plain edge {label!r} is not a single-target function edge")
            payload = {"source": f"node:{e.tail[0].node_type}", "target": f"node:{e.head[0].node_type}",
                       "optional": e.tail[0].multiplicity.min == 0}
            if e.tail[0].role is not None:
                payload["role"] = e.tail[0].role
            pieces.append(_Piece(ref, "function", label, payload, RULE_FUNCTION))
        else:
            raise NotInImage(f"edge {label!r} of kind {e.kind!r} has no inverse transformation")

    # a type both read as structure somewhere and used as a plain lexical type stays declared
    generated -= {p.payload["type"] for p in pieces if p.kind == "lexical"}
    user = reg.without(generated)
    if r is None:
        return SupermodelSchema(tuple(MetaElement(p.produced, p.kind, p.label, p.payload) for p in pieces),
                                source_model or "supermodel", user)

    by_produced = {p.produced: p for p in pieces}
    ids = {}
    for s in r.steps:
        piece = by_produced.get(s.produced)
        if piece is None:
            raise NotInImage(f"report step for {s.element!r} names {s.produced!r}, which the schema lacks")
        if piece.rule != s.rule:
            raise NotInImage(f"report step for {s.element!r} claims rule {s.rule} for {s.produced!r}, "
                             f"which only rule {piece.rule} produces")
        if s.produced in ids:
            raise NotInImage(f"two report steps produce {s.produced!r}")
        ids[s.produced] = s.element
    missing = sorted(set(by_produced) - set(ids))
    if missing:
        raise NotInImage(f"schema elements without a report step: {', '.join(missing)}")
    position = {s.produced: s.position for s in r.steps}

    def remap(payload: dict) -> dict:
        out = dict(payload)
        for k in ("source", "target", "sub", "super"):
            if k in out:
                out[k] = ids[out[k]]
        if "members" in out:
            out["members"] = [{**m, "ref": ids[m["ref"]]} for m in out["members"]]
        return out

    ordered = sorted(pieces, key=lambda p: position[p.produced])
    elements = tuple(MetaElement(ids[p.produced], p.kind, p.label, remap(p.payload)) for p in ordered)
    return SupermodelSchema(elements, source_model or r.source_model, user)


# preservation harness

def check_information_preservation(sm: SupermodelSchema, *,
                                   tamper: Callable[[TranslationReport], TranslationReport] | None = None
                                   ) -> Verdict:
    """Does ``translate_inverse(translate(sm))`` give ``sm`` back?  ``tamper`` may corrupt the report."""
    try:
        tgs, report = translate(sm)
        if tamper is not None:
            report = tamper(report)
        back = translate_inverse(tgs, report)
    except TgmError as exc:
        return Verdict.of([Violation(type(exc).__name__, sm.source_model, str(exc))])
    return Verdict.of(supermodel_diff(sm, back))


def check_semantics_preservation(sm: SupermodelSchema, instances: Iterable,
                                 instance_mapper: Callable | None) -> Verdict:
    """Map each source instance and validate it under ``translate(sm)``.

    ``instance_mapper(instance, tgs)`` must return a TypedGraphInstance.
    """
    if instance_mapper is None:
        raise MapperUnavailable(f"no instance mapper for source model {sm.source_model!r}")
    tgs, _ = translate(sm)
    found: list[Violation] = []
    for i, inst in enumerate(instances):
        g = instance_mapper(inst, tgs)
        if not isinstance(g, TypedGraphInstance):
            raise SupermodelError("instance mapper did not return a TypedGraphInstance")
        found.extend(v.prefixed(f"instance[{i}]/") for v in validate_instance(g).violations)
    return Verdict.of(found)


# construction helpers

class SupermodelBuilder:
    """Build supermodel schemas by name; ids equal the labels the translation produces."""

    def __init__(self, source_model: str = "supermodel", types: TypeRegistry | None = None):
        self.source_model = source_model
        self.types = types or TypeRegistry()
        self.elements: list[MetaElement] = []
        self._owner_ref: dict[str, str] = {}

    def add_types(self, *types: DataType) -> SupermodelBuilder:
        self.types = self.types.register(*types)
        return self

    def _add(self, id_: str, kind: str, label: str, payload=None) -> str:
        self.elements.append(MetaElement(id_, kind, label, payload or {}))
        return id_

    def abstract(self, label: str) -> str:
        self._owner_ref[label] = f"node:{label}"
        return self._add(f"node:{label}", "abstract", label)

    def attribute(self, owner: str, name: str, type_label: str, *, key: bool = False,
                  optional: bool = False, alternatives: bool = False) -> str:
        """A lexical property of an abstract or relationship, with its attaching function."""
        payload = {"type": type_label}
        if key:
            payload["key"] = True
        if alternatives:
            payload["alternatives"] = True
        lex = self._add(f"property:{owner}.{name}", "lexical", name, payload)
        self._add(f"attribute:{owner}.{name}", "function", name,
                  {"source": self._owner_ref[owner], "target": lex, "optional": optional})
        return lex

    def structured(self, owner: str, name: str, type_label: str, members: Sequence[tuple],
                   *, optional: bool = False) -> str:
        """A structured value (record) attribute; members are (name, type[, optional])."""
        refs = []
        for m in members:
            mname, mtype = m[0], m[1]
            mopt = len(m) > 2 and m[2]
            lex = self._add(f"property:{owner}.{name}.{mname}", "lexical", mname, {"type": mtype})
            refs.append({"ref": lex, "min": 0 if mopt else 1, "max": 1})
        agg = self._add(f"type:{type_label}@{owner}.{name}", "aggregation", name,
                        {"members": refs, "type": type_label})
        self._add(f"attribute:{owner}.{name}", "function", name,
                  {"source": self._owner_ref[owner], "target": agg, "optional": optional})
        return agg

    def relationship(self, label: str, members: Sequence[tuple]) -> str:
        """members: (abstract label, min, max[, role]); the first member is the tail."""
        ms = []
        for m in members:
            d = {"ref": f"node:{m[0]}", "min": m[1], "max": m[2]}
            if len(m) > 3 and m[3] is not None:
                d["role"] = m[3]
            ms.append(d)
        self._owner_ref[label] = f"edge:{label}"
        return self._add(f"edge:{label}", "aggregation", label, {"members": ms})

    def isa(self, sub: str, sup: str, label: str | None = None) -> str:
        label = label or f"{sub}_isa_{sup}"
        return self._add(f"edge:{label}", "generalization", label, {"sub": f"node:{sub}", "super": f"node:{sup}"})

    def function(self, label: str, source: str, target: str, *, optional: bool = False,
                 role: str | None = None) -> str:
        payload = {"source": f"node:{source}", "target": f"node:{target}", "optional": optional}
        if role is not None:
            payload["role"] = role
        return self._add(f"edge:{label}", "function", label, payload)

    def build(self) -> SupermodelSchema:
        return SupermodelSchema(tuple(self.elements), self.source_model, self.types)


# random schemas for property tests

def random_supermodel(seed: int, *, max_abstracts: int = 5) -> SupermodelSchema:
    """A random well-formed supermodel schema with opaque ids in shuffled order."""
    rng = random.Random(seed)
    types = TypeRegistry().register(
        range_of("percent", "integer", 0, 100),
        range_of("short_text", "text", 0, 20),
        enum_of("colour", ["red", "green", "blue"]),
        record("Point", [("x", "decimal"), ("y", "decimal")]),
        array_of("triple", "integer", 3),
        collection("tags", "set", "text"),
    )
    scalar = list(PRIMITIVES) + ["percent", "short_text", "colour", "Point", "tags"]
    n_abs = rng.randint(1, max_abstracts)
    abstracts = [f"A{i}" for i in range(n_abs)]
    counter = iter(range(10_000))
    elements: list[MetaElement] = []

    def new(kind, label, payload=None) -> str:
        eid = f"e{next(counter):03d}x{rng.randrange(1000):03d}"
        elements.append(MetaElement(eid, kind, label, payload or {}))
        return eid

    ids = {a: new("abstract", a) for a in abstracts}

    def attach(owner_id: str, owner_is_node: bool, n_attrs: int):
        for j in range(n_attrs):
            name = f"p{j}"
            roll = rng.random()
            if roll < 0.15:
                members = []
                for k in range(rng.randint(1, 3)):
                    lex = new("lexical", f"m{k}", {"type": rng.choice(list(PRIMITIVES))})
                    members.append({"ref": lex, "min": rng.choice([0, 1]), "max": 1})
                target = new("aggregation", name, {"members": members, "type": f"S{next(counter)}"})
            else:
                payload = {"type": rng.choice(scalar)}
                if roll > 0.9:
                    payload = {"type": "triple", "alternatives": True}
                elif owner_is_node and roll > 0.75:
                    payload["key"] = True
                target = new("lexical", name, payload)
            new("function", name, {"source": owner_id, "target": target, "optional": rng.random() < 0.3})

    for a in abstracts:
        attach(ids[a], True, rng.randint(0, 3))
    for i in range(rng.randint(0, 3)):
        k = rng.randint(2, 3)
        picks = [rng.choice(abstracts) for _ in range(k)]
        members = []
        for j, p in enumerate(picks):
            lo = rng.choice([0, 0, 1, 2])
            hi = rng.choice(["*", max(lo, 1), lo + 3])
            members.append({"ref": ids[p], "min": lo, "max": hi, "role": f"r{j}"})
        rel = new("aggregation", f"R{i}", {"members": members})
        attach(rel, False, rng.randint(0, 2))
    for i in range(rng.randint(0, 2)):
        if n_abs < 2:
            break
        sub, sup = sorted(rng.sample(range(n_abs), 2), reverse=True)
        new("generalization", f"G{i}", {"sub": ids[abstracts[sub]], "super": ids[abstracts[sup]]})
    for i in range(rng.randint(0, 2)):
        payload = {"source": ids[rng.choice(abstracts)], "target": ids[rng.choice(abstracts)],
                   "optional": rng.random() < 0.5}
        if rng.random() < 0.5:
            payload["role"] = f"fk{i}"
        new("function", f"F{i}", payload)
    rng.shuffle(elements)
    return SupermodelSchema(tuple(elements), "random", types)


def supermodel_key(sm: SupermodelSchema) -> str:
    """Identity-free, order-free fingerprint: elements described by labels, not ids."""
    by = sm.by_id()

    def name(eid):
        e = by[eid]
        return f"{e.kind}:{e.label}:{_ref_context(eid, sm)}"

    def describe(e: MetaElement):
        p = e.canonical_payload()
        for k in ("source", "target", "sub", "super"):
            if k in p:
                p[k] = name(p[k])
        if "members" in p:
            p["members"] = [{**m, "ref": name(m["ref"])} for m in p["members"]]
        return {"kind": e.kind, "label": e.label, "ctx": _ref_context(e.id, sm), **p}

    items = sorted(json.dumps(describe(e), sort_keys=True) for e in sm.elements)
    return json.dumps({"types": sm.types.to_json(), "elements": items}, sort_keys=True)


def _ref_context(eid: str, sm: SupermodelSchema) -> str:
    """Where a value element sits (its owner chain), to tell same-named values apart."""
    by = sm.by_id()
    me = by[eid]
    if not (me.kind == "lexical" or (me.kind == "aggregation" and "type" in me.payload)):
        return ""  # abstracts, relationships, ... have unique labels already
    for e in sm.elements:
        if e.kind == "function" and e.payload.get("target") == eid:
            src = by[e.payload["source"]]
            return f"{src.label}"
        if e.kind == "aggregation" and any(m["ref"] == eid for m in e.payload.get("members", [])) \
                and by[eid].kind == "lexical":
            return f"{e.label}@{_ref_context(e.id, sm)}"
    return ""


def validate_translation(sm: SupermodelSchema) -> Verdict:
    """Translate and validate the resulting schema (every lift should pass)."""
    tgs, _ = translate(sm)
    return validate_schema(tgs)
