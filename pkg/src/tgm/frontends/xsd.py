"""XML-Schema subset: nested elements, sequences, simple content and attributes.

The mapping is the compact one: every repeatable complex element (and the
root) is one abstract whose record keeps its child elements in document
order followed by its attributes.  A non-repeatable complex child made only
of simple parts (``simpleContent`` with attributes, or a flat sequence)
becomes a structured property; its simple content is the component
``value``.  Containment of a repeatable complex element becomes a
relationship ``<Parent>_has_<Child>`` whose parent end carries the effective
occurrence bounds (sequence bounds times element bounds) and whose child end
is exactly one.

``xs:choice``, ``xs:all``, groups, substitution groups, wildcards and type
references to named complex types are rejected with UnsupportedFeature.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from xml.parsers import expat
from dataclasses import dataclass, field
from typing import Mapping

from ..datatypes import DataType, collection, enum_of, range_of
from ..errors import SchemaSyntaxError, UnsupportedFeature
from ..supermodel import SupermodelBuilder, SupermodelSchema

XS = "{http://www.w3.org/2001/XMLSchema}"
XS_URI = XS[1:-1]
UNBOUNDED = "*"

VALUE = "value"  # component holding simple content next to its attributes

XS_TYPES = {
    "string": "text", "normalizedString": "text", "token": "text", "anyURI": "text",
    "integer": "integer", "int": "integer", "long": "integer", "short": "integer",
    "nonNegativeInteger": "integer", "positiveInteger": "integer",
    "double": "decimal", "float": "decimal", "decimal": "decimal",
    "boolean": "boolean", "date": "date",
}

# money and similar types an override table may name without declaring them
OVERRIDE_TYPES = {"euro": range_of("euro", "decimal", 0, None)}

_UNSUPPORTED = ("choice", "all", "group", "attributeGroup", "any", "anyAttribute", "complexContent",
                "union", "list", "import", "include", "redefine", "key", "keyref", "unique")


@dataclass(frozen=True)
class XsdAttribute:
    name: str
    type: str
    required: bool = False


@dataclass(frozen=True)
class XsdComplex:
    children: tuple[XsdElement, ...] = ()
    attributes: tuple[XsdAttribute, ...] = ()
    simple_base: str | None = None


@dataclass(frozen=True)
class XsdElement:
    name: str
    min: int = 1
    max: int | str = 1
    type: str | None = None
    complex: XsdComplex | None = None

    @property
    def repeatable(self) -> bool:
        return self.max == UNBOUNDED or self.max > 1

    @property
    def is_flat(self) -> bool:
        """Complex content made only of simple parts (candidate for a structured property)."""
        c = self.complex
        if c is None or not (c.children or c.attributes or c.simple_base):
            return False
        return all(ch.complex is None and not ch.repeatable for ch in c.children)


@dataclass(frozen=True)
class XsdSubsetSchema:
    root: XsdElement | None
    simple_types: tuple[DataType, ...] = ()

    def canonical(self) -> str:
        def el(e: XsdElement):
            d = {"name": e.name, "min": e.min, "max": e.max}
            if e.type is not None:
                d["type"] = e.type
            if e.complex is not None:
                d["children"] = [el(c) for c in e.complex.children]
                d["attributes"] = [[a.name, a.type, a.required] for a in e.complex.attributes]
                d["simple_base"] = e.complex.simple_base
            return d

        return json.dumps({"root": el(self.root) if self.root else None,
                           "simple_types": sorted((t.to_json() for t in self.simple_types),
                                                  key=lambda t: t["label"])}, sort_keys=True)


# parsing

def _read_tree(text: str):
    """Parse XML into ElementTree elements, recording positions and namespace prefixes."""
    parser = expat.ParserCreate(namespace_separator=" ")
    builder = ET.TreeBuilder()
    positions: dict[int, tuple[int, int]] = {}
    prefixes: dict[str, str] = {}

    def tag(name: str) -> str:
        uri, _, local = name.rpartition(" ")
        return f"{{{uri}}}{local}" if uri else local

    def start(name, attrs):
        el = builder.start(tag(name), {tag(k): v for k, v in attrs.items()})
        positions[id(el)] = (parser.CurrentLineNumber, parser.CurrentColumnNumber + 1)

    parser.StartElementHandler = start
    parser.EndElementHandler = lambda name: builder.end(tag(name))
    parser.StartNamespaceDeclHandler = lambda prefix, uri: prefixes.setdefault(prefix or "", uri)
    try:
        parser.Parse(text, True)
    except expat.ExpatError as exc:
        raise SchemaSyntaxError(f"malformed XML: {expat.ErrorString(exc.code)}", exc.lineno,
                                exc.offset + 1) from None
    return builder.close(), positions, prefixes


class _Reader:
    def __init__(self, text: str):
        self.tree, self.pos, self.tree_ns = _read_tree(text)
        self.simple: dict[str, DataType] = {}

    def fail(self, node, msg):
        line, col = self.pos.get(id(node), (0, 0))
        raise SchemaSyntaxError(msg, line, col)

    def local(self, node) -> str:
        if not node.tag.startswith(XS):
            self.fail(node, f"element {node.tag!r} is outside the XML Schema namespace")
        name = node.tag[len(XS):]
        if name in _UNSUPPORTED or name == "substitutionGroup":
            line, col = self.pos.get(id(node), (0, 0))
            raise UnsupportedFeature(f"xs:{name} (line {line}, column {col})")
        return name

    def occurs(self, node) -> tuple[int, int | str]:
        def read(attr, default):
            raw = node.get(attr)
            if raw is None:
                return default
            if raw == "unbounded":
                return UNBOUNDED
            try:
                v = int(raw)
            except ValueError:
                self.fail(node, f"{attr}={raw!r} is not a number")
            if v < 0:
                self.fail(node, f"{attr}={raw!r} is negative")
            return v

        lo, hi = read("minOccurs", 1), read("maxOccurs", 1)
        if lo == UNBOUNDED:
            self.fail(node, "minOccurs cannot be unbounded")
        if hi != UNBOUNDED and (hi < lo or hi == 0):
            self.fail(node, f"occurrence bounds ({lo},{hi}) are not well formed")
        return lo, hi

    def type_ref(self, node, raw: str) -> str:
        prefix, _, name = raw.rpartition(":")
        uri = self.tree_ns.get(prefix) if prefix else None
        if (prefix and uri == XS_URI) or (not prefix and name in XS_TYPES and name not in self.simple):
            if name not in XS_TYPES:
                raise UnsupportedFeature(f"built-in type xs:{name}")
            return XS_TYPES[name]
        if name in self.simple:
            return name
        self.fail(node, f"unknown type {raw!r}")

    def simple_type(self, node) -> DataType:
        name = node.get("name")
        if not name:
            self.fail(node, "named simpleType expected at top level")
        kids = list(node)
        if len(kids) != 1 or self.local(kids[0]) != "restriction":
            self.fail(node, f"simpleType {name!r}: only xs:restriction is supported")
        r = kids[0]
        base = self.type_ref(r, r.get("base", ""))
        lo = hi = None
        enum = []
        for facet in r:
            f = self.local(facet)
            v = facet.get("value")
            if f == "enumeration":
                enum.append(v)
            elif f in ("minInclusive", "maxInclusive"):
                num = float(v) if base == "decimal" else int(v) if base == "integer" else v
                if f == "minInclusive":
                    lo = num
                else:
                    hi = num
            elif f == "maxLength" and base == "text":
                lo, hi = 0, int(v)
            else:
                raise UnsupportedFeature(f"simpleType {name!r}: facet xs:{f}")
        if enum:
            return enum_of(name, enum)
        return range_of(name, base, lo, hi)

    def sequence(self, node, factor: tuple[int, int | str]) -> list[XsdElement]:
        lo, hi = self.occurs(node)
        lo, hi = lo * factor[0], _mul(hi, factor[1])
        out = []
        for child in node:
            kind = self.local(child)
            if kind == "element":
                out.append(self.element(child, (lo, hi)))
            elif kind == "sequence":
                out.extend(self.sequence(child, (lo, hi)))
            elif kind != "annotation":
                self.fail(child, f"xs:{kind} not allowed in a sequence")
        return out

    def attribute(self, node) -> XsdAttribute:
        name = node.get("name")
        if not name:
            self.fail(node, "attribute without a name")
        t = self.type_ref(node, node.get("type", "xs:string"))
        use = node.get("use", "optional")
        if use not in ("optional", "required"):
            raise UnsupportedFeature(f"attribute {name!r}: use={use!r}")
        return XsdAttribute(name, t, use == "required")

    def complex_type(self, node) -> XsdComplex:
        children, attrs, base = [], [], None
        for part in node:
            kind = self.local(part)
            if kind == "sequence":
                if children:
                    self.fail(part, "more than one sequence")
                children = self.sequence(part, (1, 1))
            elif kind == "attribute":
                attrs.append(self.attribute(part))
            elif kind == "simpleContent":
                exts = [x for x in part if self.local(x) != "annotation"]
                if len(exts) != 1 or self.local(exts[0]) != "extension":
                    self.fail(part, "simpleContent needs exactly one xs:extension")
                base = self.type_ref(exts[0], exts[0].get("base", ""))
                for a in exts[0]:
                    if self.local(a) != "attribute":
                        self.fail(a, "only attributes may extend simple content")
                    attrs.append(self.attribute(a))
            elif kind != "annotation":
                self.fail(part, f"xs:{kind} not supported in a complexType")
        if base is not None and children:
            self.fail(node, "simple content and child elements are exclusive")
        names = [c.name for c in children] + [a.name for a in attrs]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            self.fail(node, f"repeated element or attribute names {dupes}")
        if base is None and VALUE in names and all(ch.complex is None for ch in children):
            raise UnsupportedFeature(f"a child element named {VALUE!r} clashes with simple content")
        return XsdComplex(tuple(children), tuple(attrs), base)

    def element(self, node, factor=(1, 1)) -> XsdElement:
        if node.get("ref") is not None or node.get("substitutionGroup") is not None:
            line, col = self.pos.get(id(node), (0, 0))
            raise UnsupportedFeature(f"element references and substitution groups (line {line}, column {col})")
        name = node.get("name")
        if not name:
            self.fail(node, "element without a name")
        lo, hi = self.occurs(node)
        lo, hi = lo * factor[0], _mul(hi, factor[1])
        kids = [k for k in node if self.local(k) != "annotation"]
        if node.get("type") is not None:
            if kids:
                self.fail(node, f"element {name!r} has both a type attribute and an inline type")
            return XsdElement(name, lo, hi, type=self.type_ref(node, node.get("type")))
        if not kids:
            return XsdElement(name, lo, hi, type="text")
        if len(kids) != 1:
            self.fail(node, f"element {name!r} needs exactly one inline type")
        kind = self.local(kids[0])
        if kind == "complexType":
            return XsdElement(name, lo, hi, complex=self.complex_type(kids[0]))
        if kind == "simpleType":
            self.fail(kids[0], "anonymous simple types are not supported; name them at top level")
        self.fail(kids[0], f"xs:{kind} is not an element type")

    def parse(self) -> XsdSubsetSchema:
        if self.tree.tag != f"{XS}schema":
            self.fail(self.tree, "document element must be xs:schema")
        roots = []
        for top in self.tree:
            kind = self.local(top)
            if kind == "simpleType":
                t = self.simple_type(top)
                if t.label in self.simple:
                    self.fail(top, f"simpleType {t.label!r} declared twice")
                self.simple[t.label] = t
            elif kind == "element":
                roots.append(top)
            elif kind == "complexType":
                raise UnsupportedFeature("named complex types")
            elif kind != "annotation":
                self.fail(top, f"xs:{kind} not supported at top level")
        if len(roots) > 1:
            self.fail(roots[1], "exactly one root element is supported")
        root = self.element(roots[0]) if roots else None
        if root is not None and root.complex is None:
            self.fail(roots[0], "the root element must have complex content")
        return XsdSubsetSchema(root, tuple(self.simple.values()))


def _mul(a, b):
    if a == UNBOUNDED or b == UNBOUNDED:
        return UNBOUNDED if (a != 0 and b != 0) else 0
    return a * b


def parse_xsd(text: str) -> XsdSubsetSchema:
    if not text.strip():
        raise SchemaSyntaxError("empty document", 1, 1)
    return _Reader(text).parse()


def load_xsd(path) -> XsdSubsetSchema:
    with open(path, encoding="utf-8") as fh:
        return parse_xsd(fh.read())


# lifting

def _label(name: str) -> str:
    return name[:1].upper() + name[1:]


def load_type_overrides(source) -> dict[str, str]:
    """An override table from a mapping, a JSON file path, or ``key=type`` pairs."""
    if source is None:
        return {}
    if isinstance(source, Mapping):
        return dict(source)
    if isinstance(source, str) and "=" in source and not source.endswith(".json"):
        return dict(part.split("=", 1) for part in source.split(","))
    with open(source, encoding="utf-8") as fh:
        return dict(json.load(fh))


def lift_xsd(x: XsdSubsetSchema, type_overrides: Mapping[str, str] | None = None) -> SupermodelSchema:
    """Lift to the supermodel; ``type_overrides`` maps ``name`` or ``Owner.name`` to a type label."""
    overrides = dict(type_overrides or {})
    b = SupermodelBuilder("xsd")
    extra: dict[str, DataType] = {t.label: t for t in x.simple_types}

    def typed(owner: str, name: str, t: str) -> str:
        new = overrides.get(f"{owner}.{name}", overrides.get(name))
        if new is None:
            return t
        if new in OVERRIDE_TYPES:
            extra[new] = OVERRIDE_TYPES[new]
        return new

    def simple(owner: str, e: XsdElement):
        t = typed(owner, e.name, e.type)
        if e.repeatable:
            lst = f"{t}_list_{e.min}_{e.max}"
            extra[lst] = collection(lst, "list", t, e.min, e.max)
            b.attribute(owner, e.name, lst)
        else:
            b.attribute(owner, e.name, t, optional=e.min == 0)

    def complex_(label: str, e: XsdElement):
        for child in e.complex.children:
            if child.complex is None:
                simple(label, child)
            elif child.repeatable or not child.is_flat:
                sub = _label(child.name)
                b.abstract(sub)
                b.relationship(f"{label}_has_{sub}", [(label, child.min, child.max), (sub, 1, 1, child.name)])
                complex_(sub, child)
            else:
                c = child.complex
                scope = f"{label}.{child.name}"
                members = []
                if c.simple_base is not None:
                    members.append((VALUE, typed(scope, VALUE, c.simple_base)))
                for g in c.children:
                    members.append((g.name, typed(scope, g.name, g.type), g.min == 0))
                for a in c.attributes:
                    members.append(("@" + a.name, typed(scope, "@" + a.name, a.type), not a.required))
                b.structured(label, child.name, f"{label}_{child.name}", members, optional=child.min == 0)
        for a in e.complex.attributes:
            b.attribute(label, "@" + a.name, typed(label, "@" + a.name, a.type), optional=not a.required)

    if x.root is not None:
        root = _label(x.root.name)
        b.abstract(root)
        complex_(root, x.root)
    unknown = sorted(set(overrides.values()) - set(extra) - {"text", "integer", "decimal", "boolean", "date"})
    if unknown:
        raise UnsupportedFeature(f"type override names unknown types {unknown}")
    b.add_types(*extra.values())
    return b.build()


def lower_xsd(sm: SupermodelSchema) -> XsdSubsetSchema:
    """Rebuild the element tree of a supermodel schema in the image of lift_xsd."""
    by = sm.by_id()
    reg = sm.types
    parts: dict[str, list] = {}
    contained = set()
    for el in sm.elements:
        if el.kind == "aggregation" and "type" not in el.payload:
            if len(el.payload["members"]) != 2:
                raise UnsupportedFeature(f"relationship {el.label!r} is not a containment")
            parent, child = el.payload["members"]
            p_label, c_label = by[parent["ref"]].label, by[child["ref"]].label
            parts.setdefault(p_label, []).append(("child", c_label, parent, child))
            contained.add(c_label)
        elif el.kind == "function" and by[el.payload["target"]].kind in ("lexical", "aggregation"):
            owner = by[el.payload["source"]].label
            parts.setdefault(owner, []).append(("value", by[el.payload["target"]],
                                                bool(el.payload.get("optional")), None))
        elif el.kind in ("generalization", "function"):
            raise UnsupportedFeature(f"{el.kind} {el.label!r} has no XML Schema counterpart")

    def lexical(lex, optional: bool):
        t = lex.payload["type"]
        dt = reg.get(t) if t in reg.types else None
        if lex.label.startswith("@"):
            return XsdAttribute(lex.label[1:], t, not optional)
        if dt is not None and dt.kind == "list":
            return XsdElement(lex.label, dt.bounds[0], dt.bounds[1], type=dt.element)
        return XsdElement(lex.label, 0 if optional else 1, 1, type=t)

    def structured(agg, optional: bool) -> XsdElement:
        kids, attrs, base = [], [], None
        for m in agg.payload["members"]:
            lex = by[m["ref"]]
            if lex.label == VALUE:
                base = lex.payload["type"]
            else:
                item = lexical(lex, m["min"] == 0)
                (attrs if isinstance(item, XsdAttribute) else kids).append(item)
        return XsdElement(agg.label, 0 if optional else 1, 1, complex=XsdComplex(tuple(kids), tuple(attrs), base))

    def build(label: str, name: str, lo, hi) -> XsdElement:
        kids, attrs = [], []
        for kind, a, b_, c in parts.get(label, []):
            if kind == "child":
                kids.append(build(a, c.get("role", a[:1].lower() + a[1:]), b_["min"], b_["max"]))
                continue
            item = lexical(a, b_) if a.kind == "lexical" else structured(a, b_)
            (attrs if isinstance(item, XsdAttribute) else kids).append(item)
        return XsdElement(name, lo, hi, complex=XsdComplex(tuple(kids), tuple(attrs), None))

    roots = [e.label for e in sm.elements if e.kind == "abstract" and e.label not in contained]
    if len(roots) > 1:
        raise UnsupportedFeature(f"several uncontained abstracts {roots}; XML needs one root")
    simple = tuple(t for t in reg.user_types() if t.kind in ("range", "enum") and t.label not in OVERRIDE_TYPES)
    if not roots:
        return XsdSubsetSchema(None, simple)
    return XsdSubsetSchema(build(roots[0], roots[0][:1].lower() + roots[0][1:], 1, 1), simple)


def render_xsd(x: XsdSubsetSchema) -> str:
    """Serialize the subset schema back into XML Schema text (one sequence per complex type)."""
    ET.register_namespace("xs", XS_URI)
    root = ET.Element(f"{XS}schema")
    inverse = {"text": "xs:string", "integer": "xs:integer", "decimal": "xs:decimal",
               "boolean": "xs:boolean", "date": "xs:date"}

    def tname(t):
        return inverse.get(t, t)

    for t in x.simple_types:
        st = ET.SubElement(root, f"{XS}simpleType", name=t.label)
        if t.kind == "enum":
            r = ET.SubElement(st, f"{XS}restriction", base="xs:string")
            for v in t.variants:
                ET.SubElement(r, f"{XS}enumeration", value=str(v))
        else:
            r = ET.SubElement(st, f"{XS}restriction", base=tname(t.element))
            lo, hi = t.bounds
            if lo is not None:
                ET.SubElement(r, f"{XS}minInclusive", value=str(lo))
            if hi is not None:
                ET.SubElement(r, f"{XS}maxInclusive", value=str(hi))

    def occurs(node, e):
        if e.min != 1:
            node.set("minOccurs", str(e.min))
        if e.max != 1:
            node.set("maxOccurs", "unbounded" if e.max == UNBOUNDED else str(e.max))

    def attr(parent, a):
        node = ET.SubElement(parent, f"{XS}attribute", name=a.name, type=tname(a.type))
        if a.required:
            node.set("use", "required")

    def element(parent, e):
        node = ET.SubElement(parent, f"{XS}element", name=e.name)
        occurs(node, e)
        if e.complex is None:
            node.set("type", tname(e.type))
            return
        ct = ET.SubElement(node, f"{XS}complexType")
        c = e.complex
        if c.simple_base is not None:
            ext = ET.SubElement(ET.SubElement(ct, f"{XS}simpleContent"), f"{XS}extension",
                                base=tname(c.simple_base))
            for a in c.attributes:
                attr(ext, a)
            return
        if c.children:
            seq = ET.SubElement(ct, f"{XS}sequence")
            for ch in c.children:
                element(seq, ch)
        for a in c.attributes:
            attr(ct, a)

    if x.root is not None:
        element(root, x.root)
    ET.indent(root)
    return '<?xml version="1.0" encoding="utf-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"
