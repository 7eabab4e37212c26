"""Textual extended-ER notation.

::

    struct date { day: int  month: int  year: int }
    entity Employee { name: string key }
    entity Department { name: string key }
    rel Contract (Employee (1,*), Department (0,*)) {
        salary: int
        begin_date: date
        end_date: date optional
    }
    isa Clerk < Employee

Entities become abstracts, single-valued attributes lexicals with their
attaching functions, attributes of a ``struct`` type structured aggregations,
relationships aggregations with the participant multiplicities, and ``isa``
generalizations.  ``#`` and ``//`` start comments; attributes may be
separated by newlines, commas or semicolons.  ``weak`` entities are rejected.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from ..datatypes import BUILTINS
from ..errors import SchemaSyntaxError, UnsupportedFeature
from ..supermodel import SupermodelBuilder, SupermodelSchema

TYPE_ALIASES = {
    "int": "integer", "integer": "integer", "string": "text", "text": "text", "varchar": "text",
    "decimal": "decimal", "float": "decimal", "double": "decimal", "real": "decimal",
    "bool": "boolean", "boolean": "boolean", "date": "date",
}


@dataclass(frozen=True)
class ErAttribute:
    name: str
    type: str
    key: bool = False
    optional: bool = False


@dataclass(frozen=True)
class ErStruct:
    name: str
    members: tuple[ErAttribute, ...]


@dataclass(frozen=True)
class ErEntity:
    name: str
    attributes: tuple[ErAttribute, ...] = ()


@dataclass(frozen=True)
class ErParticipant:
    entity: str
    min: int
    max: int | str
    role: str | None = None


@dataclass(frozen=True)
class ErRelationship:
    name: str
    participants: tuple[ErParticipant, ...]
    attributes: tuple[ErAttribute, ...] = ()


@dataclass(frozen=True)
class ErIsa:
    sub: str
    super: str


@dataclass(frozen=True)
class ErSchema:
    entities: tuple[ErEntity, ...] = ()
    relationships: tuple[ErRelationship, ...] = ()
    isa: tuple[ErIsa, ...] = ()
    structs: tuple[ErStruct, ...] = ()

    def canonical(self) -> str:
        def attrs(xs):
            return [[a.name, a.type, a.key, a.optional] for a in xs]

        return json.dumps({
            "entities": sorted([e.name, attrs(e.attributes)] for e in self.entities),
            "relationships": sorted([r.name, [[p.entity, p.min, p.max, p.role] for p in r.participants],
                                     attrs(r.attributes)] for r in self.relationships),
            "isa": sorted([i.sub, i.super] for i in self.isa),
            "structs": sorted([s.name, attrs(s.members)] for s in self.structs
                              if any(a.type == s.name for o in (*self.entities, *self.relationships)
                                     for a in o.attributes)),
        }, sort_keys=True)


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>(?:\#|//)[^\n]*)
  | (?P<num>\d+) | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[{}():,;<*])
""", re.VERBOSE)

_KEYWORDS = {"entity", "rel", "isa", "struct", "key", "optional", "weak"}


class _Parser:
    def __init__(self, text: str):
        self.toks = []
        pos, line, start = 0, 1, 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                raise SchemaSyntaxError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
            if m.lastgroup == "nl":
                line += 1
                start = m.end()
            elif m.lastgroup not in ("ws", "comment"):
                self.toks.append((m.lastgroup, m.group(), line, pos - start + 1))
            pos = m.end()
        self.i = 0

    def peek(self, value=None):
        if self.i >= len(self.toks):
            return None
        t = self.toks[self.i]
        return t if value is None or t[1] == value else None

    def fail(self, msg, tok=None):
        tok = tok or self.peek() or (self.toks[-1] if self.toks else ("eof", "", 1, 1))
        raise SchemaSyntaxError(msg, tok[2], tok[3])

    def take(self, value=None, kind=None):
        t = self.peek()
        if t is None:
            self.fail(f"unexpected end of input, expected {value or kind}")
        if (value is not None and t[1] != value) or (kind is not None and t[0] != kind):
            self.fail(f"expected {value or kind}, found {t[1]!r}", t)
        self.i += 1
        return t

    def name(self) -> str:
        t = self.take(kind="ident")
        if t[1] in _KEYWORDS:
            self.fail(f"keyword {t[1]!r} used as a name", t)
        return t[1]

    def attributes(self) -> list[tuple[ErAttribute, tuple]]:
        self.take("{")
        out = []
        while not self.peek("}"):
            if self.peek(",") or self.peek(";"):
                self.take()
                continue
            tok = self.peek()
            name = self.name()
            self.take(":")
            type_tok = self.take(kind="ident")
            key = optional = False
            while self.peek("key") or self.peek("optional"):
                flag = self.take()[1]
                key = key or flag == "key"
                optional = optional or flag == "optional"
            out.append((ErAttribute(name, type_tok[1], key, optional), type_tok if tok else type_tok))
        self.take("}")
        return out

    def card(self):
        self.take("(")
        lo = int(self.take(kind="num")[1])
        self.take(",")
        if self.peek("*"):
            self.take()
            hi = "*"
        else:
            hi = int(self.take(kind="num")[1])
        self.take(")")
        return lo, hi

    def parse(self):
        decls = []
        while self.peek() is not None:
            t = self.take(kind="ident")
            kw = t[1]
            if kw == "weak":
                raise UnsupportedFeature(f"weak entities (line {t[2]}, column {t[3]})")
            if kw == "entity":
                decls.append(("entity", t, self.name(), self.attributes()))
            elif kw == "struct":
                decls.append(("struct", t, self.name(), self.attributes()))
            elif kw == "rel":
                name = self.name()
                self.take("(")
                parts = []
                while True:
                    ptok = self.peek()
                    ent = self.name()
                    role = None
                    if self.peek() and self.peek()[0] == "ident":
                        role = self.name()
                    lo, hi = self.card()
                    parts.append((ErParticipant(ent, lo, hi, role), ptok))
                    if self.peek(","):
                        self.take()
                        continue
                    break
                self.take(")")
                attrs = self.attributes() if self.peek("{") else []
                decls.append(("rel", t, name, (parts, attrs)))
            elif kw == "isa":
                sub = self.name()
                self.take("<")
                decls.append(("isa", t, sub, self.name()))
            else:
                self.fail(f"expected entity, rel, struct or isa, found {kw!r}", t)
        return decls


def _resolve_type(tok, structs: set[str]) -> str:
    name = tok[1]
    if name in structs:
        return name
    if name.lower() in TYPE_ALIASES:
        return TYPE_ALIASES[name.lower()]
    raise SchemaSyntaxError(f"unknown attribute type {name!r}", tok[2], tok[3])


def parse_er(text: str) -> ErSchema:
    decls = _Parser(text).parse()
    structs = {d[2] for d in decls if d[0] == "struct"}
    owners: dict[str, tuple] = {}
    for d in decls:
        if d[0] in ("entity", "rel", "struct"):
            if d[2] in owners:
                raise SchemaSyntaxError(f"{d[2]!r} declared twice", d[1][2], d[1][3])
            owners[d[2]] = d

    def attrs(raw, allow_struct=True):
        out, seen = [], set()
        for a, tok in raw:
            if a.name in seen:
                raise SchemaSyntaxError(f"attribute {a.name!r} repeated", tok[2], tok[3])
            seen.add(a.name)
            t = _resolve_type(tok, structs if allow_struct else set())
            out.append(ErAttribute(a.name, t, a.key, a.optional))
        return tuple(out)

    entities, rels, isas, struct_defs = [], [], [], []
    entity_names = {d[2] for d in decls if d[0] == "entity"}
    for kind, tok, name, body in decls:
        if kind == "struct":
            members = attrs(body, allow_struct=False)
            if any(m.key for m in members):
                raise SchemaSyntaxError(f"struct {name!r} members cannot be keys", tok[2], tok[3])
            struct_defs.append(ErStruct(name, members))
        elif kind == "entity":
            entities.append(ErEntity(name, attrs(body)))
        elif kind == "rel":
            parts, raw = body
            if len(parts) < 2:
                raise SchemaSyntaxError(f"relationship {name!r} needs at least two participants", tok[2], tok[3])
            for p, ptok in parts:
                if p.entity not in entity_names:
                    raise SchemaSyntaxError(f"relationship {name!r}: unknown entity {p.entity!r}",
                                            ptok[2], ptok[3])
                if p.max != "*" and p.min > p.max:
                    raise SchemaSyntaxError(f"relationship {name!r}: ({p.min},{p.max}) has min > max",
                                            ptok[2], ptok[3])
            a = attrs(raw)
            if any(x.key for x in a):
                raise SchemaSyntaxError(f"relationship {name!r} attributes cannot be keys", tok[2], tok[3])
            rels.append(ErRelationship(name, tuple(p for p, _ in parts), a))
        elif kind == "isa":
            for n in (name, body):
                if n not in entity_names:
                    raise SchemaSyntaxError(f"isa refers to unknown entity {n!r}", tok[2], tok[3])
            isas.append(ErIsa(name, body))
    return ErSchema(tuple(entities), tuple(rels), tuple(isas), tuple(struct_defs))


def load_er(path) -> ErSchema:
    with open(path, encoding="utf-8") as fh:
        return parse_er(fh.read())


def struct_type_label(name: str) -> str:
    """Record label for a struct; names clashing with built-in types are capitalised."""
    return name[:1].upper() + name[1:] if name in BUILTINS else name


def _struct_name(label: str) -> str:
    low = label[:1].lower() + label[1:]
    return low if low in BUILTINS and label != low else label


def lift_er(e: ErSchema) -> SupermodelSchema:
    b = SupermodelBuilder("er")
    structs = {s.name: s for s in e.structs}

    def add(owner: str, attrs):
        for a in attrs:
            if a.type in structs:
                members = [(m.name, m.type, m.optional) for m in structs[a.type].members]
                b.structured(owner, a.name, struct_type_label(a.type), members, optional=a.optional)
            else:
                b.attribute(owner, a.name, a.type, key=a.key, optional=a.optional)

    for ent in e.entities:
        b.abstract(ent.name)
        add(ent.name, ent.attributes)
    for r in e.relationships:
        b.relationship(r.name, [(p.entity, p.min, p.max, p.role) for p in r.participants])
        add(r.name, r.attributes)
    for i in e.isa:
        b.isa(i.sub, i.super)
    return b.build()


def lower_er(sm: SupermodelSchema) -> ErSchema:
    by = sm.by_id()
    attrs: dict[str, list[ErAttribute]] = {}
    structs: dict[str, ErStruct] = {}
    for el in sm.elements:
        if el.kind in ("abstract", "aggregation") and "type" not in el.payload:
            attrs[el.label] = []
    for el in sm.elements:
        if el.kind != "function" or el.payload["target"] not in by:
            continue
        tgt = by[el.payload["target"]]
        owner = by[el.payload["source"]]
        if tgt.kind == "lexical":
            attrs[owner.label].append(ErAttribute(tgt.label, tgt.payload["type"], bool(tgt.payload.get("key")),
                                                  bool(el.payload.get("optional"))))
        elif tgt.kind == "aggregation":
            name = _struct_name(tgt.payload["type"])
            members = tuple(ErAttribute(by[m["ref"]].label, by[m["ref"]].payload["type"], False, m["min"] == 0)
                            for m in tgt.payload["members"])
            structs[name] = ErStruct(name, members)
            attrs[owner.label].append(ErAttribute(tgt.label, name, False, bool(el.payload.get("optional"))))
    entities, rels, isas = [], [], []
    for el in sm.elements:
        if el.kind == "abstract":
            entities.append(ErEntity(el.label, tuple(attrs[el.label])))
        elif el.kind == "aggregation" and "type" not in el.payload:
            parts = tuple(ErParticipant(by[m["ref"]].label, m["min"], m["max"], m.get("role"))
                          for m in el.payload["members"])
            rels.append(ErRelationship(el.label, parts, tuple(attrs[el.label])))
        elif el.kind == "generalization":
            isas.append(ErIsa(by[el.payload["sub"]].label, by[el.payload["super"]].label))
        elif el.kind == "function" and by[el.payload["target"]].kind == "abstract":
            src, tgt = by[el.payload["source"]].label, by[el.payload["target"]].label
            lo = 0 if el.payload.get("optional") else 1
            rels.append(ErRelationship(el.label, (ErParticipant(src, lo, 1, el.payload.get("role")),
                                                  ErParticipant(tgt, 0, "*"))))
    return ErSchema(tuple(entities), tuple(rels), tuple(isas), tuple(structs.values()))


def render_er(e: ErSchema) -> str:
    def attr_lines(attrs):
        out = []
        for a in attrs:
            flags = (" key" if a.key else "") + (" optional" if a.optional else "")
            out.append(f"    {a.name}: {a.type}{flags}")
        return out

    chunks = []
    for s in e.structs:
        chunks.append(f"struct {s.name} {{\n" + "\n".join(attr_lines(s.members)) + "\n}")
    for ent in e.entities:
        body = "\n".join(attr_lines(ent.attributes))
        chunks.append(f"entity {ent.name} {{\n{body}\n}}" if body else f"entity {ent.name} {{ }}")
    for r in e.relationships:
        parts = ", ".join(f"{p.entity}{' ' + p.role if p.role else ''} ({p.min},{p.max})" for p in r.participants)
        body = "\n".join(attr_lines(r.attributes))
        chunks.append(f"rel {r.name} ({parts}) {{\n{body}\n}}" if body else f"rel {r.name} ({parts})")
    for i in e.isa:
        chunks.append(f"isa {i.sub} < {i.super}")
    return "\n\n".join(chunks) + ("\n" if chunks else "")
