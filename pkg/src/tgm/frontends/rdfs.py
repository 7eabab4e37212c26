"""RDF Schema subset (Turtle or N-Triples) and RDF data instances.

Schema triples are consumed by four rules:

1. ``C rdf:type rdfs:Class`` makes ``C`` an abstract (a node type).
2. An ``rdf:Property`` whose range is a class is an aggregation between its
   domain and range (an edge type, both ends ``(0,*)`` since RDFS states no
   cardinality); ``rdfs:subClassOf`` between classes is a generalization.
3. An ``rdf:Property`` whose range is a datatype is a function from its
   domain to a lexical: a single-valued optional property of the domain
   class, or of the edge when the domain is itself an object property.
4. Datatypes (``xsd:*`` or user ``rdfs:Datatype`` with ``rdfs:subClassOf``
   and ``xsd:minInclusive``/``xsd:maxInclusive``) are the property types.

A property whose range is an ``rdf:Alt`` blank node of ``n`` uniform item
blank nodes becomes an array of ``n`` optional item records carrying an xor
constraint (exactly one alternative is populated).  Every triple must be
consumed by one of these rules; anything else, ``rdfs:subPropertyOf``
included, is reported as UnsupportedFeature rather than dropped.

Instance data uses ``rdf:type`` for nodes, datatype triples for properties,
object triples for edges and ``rdf:Statement`` reification for edge
properties.
"""

from __future__ import annotations

import datetime
import json
import random
from dataclasses import dataclass
from decimal import Decimal
from typing import Mapping

import rdflib
from rdflib import BNode, Literal, URIRef
from rdflib.namespace import RDF, RDFS, XSD

from ..datatypes import DataType, array_of, check_value, optional_of, range_of, record
from ..errors import SchemaSyntaxError, SourceIntegrityViolation, UnresolvableBnode, UnsupportedFeature
from ..instance import InstanceEdge, InstanceNode, TypedGraphInstance
from ..schema import TypedGraphSchema
from ..supermodel import SupermodelBuilder, SupermodelSchema

DEFAULT_PREFIXES = (("voc", "http://example.org/voc#"),)

XSD_TYPES = {
    "string": "text", "normalizedString": "text", "anyURI": "text",
    "int": "integer", "integer": "integer", "long": "integer", "short": "integer",
    "nonNegativeInteger": "integer",
    "decimal": "decimal", "double": "decimal", "float": "decimal",
    "boolean": "boolean", "date": "date",
}
PRIMITIVE_XSD = {"text": "string", "integer": "int", "decimal": "decimal", "boolean": "boolean", "date": "date"}


@dataclass(frozen=True)
class ObjectProperty:
    name: str
    domain: str
    range: str


@dataclass(frozen=True)
class DatatypeProperty:
    name: str
    domain: str
    range: str


@dataclass(frozen=True)
class AltProperty:
    """A property ranging over an rdf:Alt of ``size`` uniform items."""
    name: str
    domain: str
    size: int
    components: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class RdfsSchema:
    classes: tuple[str, ...] = ()
    object_properties: tuple[ObjectProperty, ...] = ()
    datatype_properties: tuple[DatatypeProperty, ...] = ()
    alternatives: tuple[AltProperty, ...] = ()
    subclass_of: tuple[tuple[str, str], ...] = ()
    datatypes: tuple[DataType, ...] = ()
    prefixes: tuple[tuple[str, str], ...] = DEFAULT_PREFIXES

    def canonical(self) -> str:
        return json.dumps({
            "classes": sorted(self.classes),
            "object": sorted([p.name, p.domain, p.range] for p in self.object_properties),
            "datatype": sorted([p.name, p.domain, p.range] for p in self.datatype_properties),
            "alternatives": sorted([a.name, a.domain, a.size, sorted(map(list, a.components))]
                                   for a in self.alternatives),
            "subclass_of": sorted(map(list, self.subclass_of)),
            "datatypes": sorted((t.to_json() for t in self.datatypes), key=lambda t: t["label"]),
        }, sort_keys=True)

    def is_object_property(self, name: str) -> bool:
        return any(p.name == name for p in self.object_properties)

    def ancestors(self, cls: str) -> list[str]:
        """``cls`` and all its superclasses, nearest first."""
        out, todo = [], [cls]
        while todo:
            c = todo.pop(0)
            if c in out:
                continue
            out.append(c)
            todo.extend(sup for sub, sup in sorted(self.subclass_of) if sub == c)
        return out


# parsing

def _graph(text_or_graph, fmt: str | None = None) -> rdflib.Graph:
    if isinstance(text_or_graph, rdflib.Graph):
        return text_or_graph
    g = rdflib.Graph()
    for prefix, uri in DEFAULT_PREFIXES:
        g.bind(prefix, uri)
    try:
        g.parse(data=text_or_graph, format=fmt or "turtle")
    except Exception as exc:  # rdflib raises several unrelated syntax error classes
        line = getattr(exc, "lines", None)
        raise SchemaSyntaxError(f"RDF syntax error: {str(exc).strip().splitlines()[0]}",
                                line + 1 if isinstance(line, int) else None) from None
    return g


class _Names:
    def __init__(self, g: rdflib.Graph):
        self.g = g
        self.uri_of: dict[str, URIRef] = {}

    def __call__(self, term) -> str:
        if isinstance(term, BNode):
            raise UnresolvableBnode(f"blank node {term.n3()} outside an rdf:Alt group")
        try:
            prefix, ns, local = self.g.namespace_manager.compute_qname(term, generate=False)
            name = f"{prefix}:{local}" if prefix else str(term)
        except (ValueError, KeyError):
            name = str(term)
        self.uri_of[name] = term
        return name


def _literal_value(lit):
    v = lit.toPython() if isinstance(lit, Literal) else lit
    if isinstance(v, datetime.datetime):
        v = v.date()
    if isinstance(v, datetime.date):
        return v.isoformat()
    if isinstance(v, Decimal):
        return float(v)
    if isinstance(v, Literal):
        text = str(v)
        for conv in (int, float):
            try:
                return conv(text)
            except ValueError:
                pass
        return text
    return v


def parse_rdfs(text, fmt: str | None = None) -> RdfsSchema:
    g = _graph(text, fmt)
    name = _Names(g)
    consumed: set = set()

    def take(s, p, o):
        consumed.add((s, p, o))

    for t in g.triples((None, RDFS.subPropertyOf, None)):
        raise UnsupportedFeature(f"rdfs:subPropertyOf ({name(t[0])} rdfs:subPropertyOf {name(t[2])})")

    classes = sorted({s for s in g.subjects(RDF.type, RDFS.Class)}, key=str)
    for c in classes:
        take(c, RDF.type, RDFS.Class)
    class_names = {name(c) for c in classes}

    # user datatypes
    datatypes: dict[str, DataType] = {}
    for t in sorted(set(g.subjects(RDF.type, RDFS.Datatype)), key=str):
        take(t, RDF.type, RDFS.Datatype)
        label = name(t)
        bases = list(g.objects(t, RDFS.subClassOf))
        if len(bases) != 1 or not str(bases[0]).startswith(str(XSD)):
            raise UnsupportedFeature(f"datatype {label}: needs exactly one rdfs:subClassOf an xsd type")
        base = _xsd(bases[0], name)
        take(t, RDFS.subClassOf, bases[0])
        bounds = []
        for facet in (XSD.minInclusive, XSD.maxInclusive):
            vals = list(g.objects(t, facet))
            if len(vals) > 1:
                raise SchemaSyntaxError(f"datatype {label}: repeated {name(facet)}")
            for v in vals:
                take(t, facet, v)
            bounds.append(_literal_value(vals[0]) if vals else None)
        datatypes[label] = range_of(label, base, *bounds)

    def type_of(term) -> str:
        if isinstance(term, URIRef) and str(term).startswith(str(XSD)):
            return _xsd(term, name)
        label = name(term)
        if label in datatypes:
            return label
        raise SchemaSyntaxError(f"{label} is neither a class nor a datatype")

    props = sorted(set(g.subjects(RDF.type, RDF.Property)), key=str)
    obj, dat, alts = [], [], []
    item_types: dict[str, DataType] = {}
    for p in props:
        take(p, RDF.type, RDF.Property)
        pname = name(p)
        domains, ranges = list(g.objects(p, RDFS.domain)), list(g.objects(p, RDFS.range))
        if len(domains) != 1 or len(ranges) != 1:
            raise UnsupportedFeature(f"property {pname}: exactly one rdfs:domain and one rdfs:range are supported "
                                     f"(found {len(domains)} and {len(ranges)})")
        take(p, RDFS.domain, domains[0])
        take(p, RDFS.range, ranges[0])
        dom, rng = domains[0], ranges[0]
        dname = name(dom)
        if isinstance(rng, BNode):
            alts.append(_alt_group(g, pname, dname, rng, name, type_of, take))
        elif name(rng) in class_names:
            obj.append(ObjectProperty(pname, dname, name(rng)))
        else:
            dat.append(DatatypeProperty(pname, dname, type_of(rng)))
    obj_names = {p.name for p in obj}
    for p in (*dat, *alts):
        if p.domain not in class_names and p.domain not in obj_names:
            raise SchemaSyntaxError(f"property {p.name}: domain {p.domain} is not a class or object property")
    for p in obj:
        if p.domain not in class_names:
            raise SchemaSyntaxError(f"property {p.name}: domain {p.domain} is not a class")

    subs = []
    for s, o in sorted(g.subject_objects(RDFS.subClassOf), key=str):
        if (s, RDFS.subClassOf, o) in consumed:
            continue
        if name(s) not in class_names or name(o) not in class_names:
            raise SchemaSyntaxError(f"rdfs:subClassOf between {name(s)} and {name(o)}: both must be classes")
        take(s, RDFS.subClassOf, o)
        subs.append((name(s), name(o)))

    leftovers = sorted((t for t in g if t not in consumed), key=lambda t: tuple(map(str, t)))
    if leftovers:
        shown = "; ".join(" ".join(x.n3(g.namespace_manager) for x in t) for t in leftovers[:3])
        raise UnsupportedFeature(f"{len(leftovers)} triple(s) match no mapping rule: {shown}")
    prefixes = tuple(sorted((p, str(u)) for p, u in g.namespaces()
                            if p and any(n.startswith(p + ":") for n in name.uri_of)))
    return RdfsSchema(tuple(sorted(class_names)), tuple(obj), tuple(dat), tuple(alts), tuple(sorted(subs)),
                      tuple(datatypes.values()), prefixes or DEFAULT_PREFIXES)


def _xsd(term, name) -> str:
    local = str(term)[len(str(XSD)):]
    if local not in XSD_TYPES:
        raise UnsupportedFeature(f"datatype {name(term)}")
    return XSD_TYPES[local]


def _alt_group(g, pname, dname, alt, name, type_of, take) -> AltProperty:
    def fail(msg):
        raise UnresolvableBnode(f"property {pname}: range blank node {alt.n3()} {msg}")

    triples = list(g.triples((alt, None, None)))
    if (alt, RDF.type, RDF.Alt) not in g:
        fail("is not an rdf:Alt")
    members = {}
    for _, p, o in triples:
        if p == RDF.type and o == RDF.Alt:
            continue
        ps = str(p)
        if not ps.startswith(str(RDF) + "_") or not ps[len(str(RDF)) + 1:].isdigit():
            fail(f"has a non-membership predicate {p.n3(g.namespace_manager)}")
        if not isinstance(o, BNode):
            fail("has a member that is not a blank node")
        members[int(ps[len(str(RDF)) + 1:])] = o
    if not members or sorted(members) != list(range(1, len(members) + 1)):
        fail("needs members rdf:_1 .. rdf:_n without gaps")
    shape = None
    for i in sorted(members):
        item = members[i]
        comps = []
        for _, p, o in sorted(g.triples((item, None, None)), key=str):
            if isinstance(o, BNode):
                fail("has nested blank nodes in an item")
            comps.append((name(p), type_of(o)))
        if len({c for c, _ in comps}) != len(comps) or not comps:
            fail("has an item with repeated or no predicates")
        if shape is not None and comps != shape:
            fail("has items of different shapes")
        shape = comps
        for t in g.triples((item, None, None)):
            take(*t)
        if len(list(g.triples((None, None, item)))) != 1:
            fail("shares an item with another structure")
    if len(list(g.triples((None, None, alt)))) != 1:
        fail("is referenced more than once")
    for t in triples:
        take(*t)
    return AltProperty(pname, dname, len(members), tuple(shape))


def load_rdfs(path) -> RdfsSchema:
    fmt = "nt" if str(path).endswith(".nt") else "turtle"
    with open(path, encoding="utf-8") as fh:
        return parse_rdfs(fh.read(), fmt)


# lifting

def alt_types(a: AltProperty) -> tuple[DataType, DataType, DataType]:
    item = record(f"{a.name}_item", a.components)
    opt = optional_of(f"{item.label}?", item.label)
    return item, opt, array_of(f"{a.name}_items", opt.label, a.size)


def lift_rdfs(r: RdfsSchema) -> SupermodelSchema:
    b = SupermodelBuilder("rdfs")
    types = list(r.datatypes)
    for a in r.alternatives:
        types.extend(alt_types(a))
    b.add_types(*types)
    for c in r.classes:
        b.abstract(c)
    for p in r.object_properties:
        b.relationship(p.name, [(p.domain, 0, "*"), (p.range, 0, "*")])
    for p in sorted(r.datatype_properties, key=lambda p: (p.domain, p.name)):
        b.attribute(p.domain, p.name, p.range, optional=True)
    for a in r.alternatives:
        b.attribute(a.domain, a.name, alt_types(a)[2].label, alternatives=True)
    for sub, sup in r.subclass_of:
        b.isa(sub, sup)
    return b.build()


def lower_rdfs(sm: SupermodelSchema, prefixes=DEFAULT_PREFIXES) -> RdfsSchema:
    """The RDFS structure of a supermodel schema in the image of lift_rdfs."""
    by = sm.by_id()
    reg = sm.types
    classes, obj, dat, alts, subs = [], [], [], [], []
    for el in sm.elements:
        if el.kind == "abstract":
            classes.append(el.label)
        elif el.kind == "aggregation" and "type" not in el.payload:
            ms = el.payload["members"]
            if len(ms) != 2:
                raise UnsupportedFeature(f"{el.label}: RDF properties are binary")
            obj.append(ObjectProperty(el.label, by[ms[0]["ref"]].label, by[ms[1]["ref"]].label))
        elif el.kind == "generalization":
            subs.append((by[el.payload["sub"]].label, by[el.payload["super"]].label))
        elif el.kind == "function":
            tgt = by[el.payload["target"]]
            owner = by[el.payload["source"]].label
            if tgt.kind != "lexical":
                raise UnsupportedFeature(f"{el.label}: only lexical functions map to datatype properties")
            if tgt.payload.get("alternatives"):
                arr = reg.get(tgt.payload["type"])
                item = reg.get(reg.resolve_optional(arr.element))
                alts.append(AltProperty(tgt.label, owner, arr.length, item.components))
            else:
                dat.append(DatatypeProperty(tgt.label, owner, tgt.payload["type"]))
    generated = {t.label for a in alts for t in alt_types(a)}
    dts = tuple(t for t in reg.user_types() if t.label not in generated and t.kind == "range")
    return RdfsSchema(tuple(sorted(classes)), tuple(obj), tuple(dat), tuple(alts), tuple(sorted(subs)), dts,
                      tuple(prefixes))


def _resolver(r: RdfsSchema):
    ns = dict(r.prefixes)

    def uri(label: str):
        prefix, _, local = label.partition(":")
        if prefix in ns:
            return URIRef(ns[prefix] + local)
        if prefix == "xsd":
            return XSD[local]
        return URIRef(label)

    return uri


def schema_graph(r: RdfsSchema) -> rdflib.Graph:
    g = rdflib.Graph()
    for p, u in r.prefixes:
        g.bind(p, u)
    uri = _resolver(r)

    def dtype(label: str):
        return XSD[PRIMITIVE_XSD[label]] if label in PRIMITIVE_XSD else uri(label)

    for c in r.classes:
        g.add((uri(c), RDF.type, RDFS.Class))
    for t in r.datatypes:
        g.add((uri(t.label), RDF.type, RDFS.Datatype))
        g.add((uri(t.label), RDFS.subClassOf, XSD[PRIMITIVE_XSD[t.element]]))
        lo, hi = t.bounds
        if lo is not None:
            g.add((uri(t.label), XSD.minInclusive, Literal(lo)))
        if hi is not None:
            g.add((uri(t.label), XSD.maxInclusive, Literal(hi)))
    for p in r.object_properties:
        for tr in ((RDF.type, RDF.Property), (RDFS.domain, uri(p.domain)), (RDFS.range, uri(p.range))):
            g.add((uri(p.name), *tr))
    for p in r.datatype_properties:
        for tr in ((RDF.type, RDF.Property), (RDFS.domain, uri(p.domain)), (RDFS.range, dtype(p.range))):
            g.add((uri(p.name), *tr))
    for a in r.alternatives:
        alt = BNode()
        for tr in ((RDF.type, RDF.Property), (RDFS.domain, uri(a.domain)), (RDFS.range, alt)):
            g.add((uri(a.name), *tr))
        g.add((alt, RDF.type, RDF.Alt))
        for i in range(1, a.size + 1):
            item = BNode()
            g.add((alt, RDF[f"_{i}"], item))
            for pred, t in a.components:
                g.add((item, uri(pred), dtype(t)))
    for sub, sup in r.subclass_of:
        g.add((uri(sub), RDFS.subClassOf, uri(sup)))
    return g


def render_rdfs(r: RdfsSchema) -> str:
    return schema_graph(r).serialize(format="turtle")


# instances

def _node_id(subject, cls: str, most_specific: str, g) -> str:
    base = subject.n3(g.namespace_manager)
    return base if cls == most_specific else f"{base}@{cls}"


def map_rdf_instance(r: RdfsSchema, data, tgs: TypedGraphSchema | None = None,
                     fmt: str | None = None) -> TypedGraphInstance:
    """Map RDF data triples to an instance of the translated schema."""
    if tgs is None:
        from ..supermodel import translate
        tgs = translate(lift_rdfs(r))[0]
    g = _graph(data, fmt)
    uri = _resolver(r)
    reg = tgs.registry
    nm = g.namespace_manager

    def locus(t) -> str:
        return " ".join(x.n3(nm) for x in t)

    def fail(msg, t):
        raise SourceIntegrityViolation(msg, f"triple {locus(t)}")

    class_of = {uri(c): c for c in r.classes}
    dat = {uri(p.name): p for p in (*r.datatype_properties, *r.alternatives)}
    objp = {uri(p.name): p for p in r.object_properties}
    consumed = set()

    # typing
    specific: dict = {}
    for t in sorted(g.triples((None, RDF.type, None)), key=str):
        s, _, o = t
        if o in (RDF.Statement, RDF.Alt):
            continue
        if o not in class_of:
            fail("rdf:type names no schema class", t)
        consumed.add(t)
        c = class_of[o]
        prev = specific.get(s)
        if prev is None or prev in r.ancestors(c):
            specific[s] = c
        elif c not in r.ancestors(prev):
            fail(f"resource typed by unrelated classes {prev} and {c}", t)

    nodes: dict[str, dict] = {}
    node_type: dict[str, str] = {}
    edges: dict[str, InstanceEdge] = {}
    for s, c in specific.items():
        chain = r.ancestors(c)
        for k in chain:
            nid = _node_id(s, k, c, g)
            nodes[nid] = {}
            node_type[nid] = k
        for sub, sup in r.subclass_of:
            if sub in chain and sup in chain:
                label = f"{sub}_isa_{sup}"
                eid = f"{label}:{s.n3(nm)}"
                edges[eid] = InstanceEdge(eid, label, (_node_id(s, sub, c, g),), (_node_id(s, sup, c, g),), {})

    def node_for(subject, cls: str, t) -> str:
        if subject not in specific:
            fail("subject has no rdf:type", t)
        c = specific[subject]
        if cls not in r.ancestors(c):
            fail(f"{c} resource used where {cls} is required", t)
        return _node_id(subject, cls, c, g)

    # reified statements carry edge properties
    statements = {}
    for st in set(g.subjects(RDF.type, RDF.Statement)):
        parts = [list(g.objects(st, p)) for p in (RDF.subject, RDF.predicate, RDF.object)]
        t = (st, RDF.type, RDF.Statement)
        if any(len(x) != 1 for x in parts):
            fail("reified statement needs one subject, predicate and object", t)
        statements[st] = tuple(x[0] for x in parts)
        consumed.update({t, (st, RDF.subject, parts[0][0]), (st, RDF.predicate, parts[1][0]),
                         (st, RDF.object, parts[2][0])})
    by_triple = {}
    for st, tr in statements.items():
        if tr in by_triple:
            fail("statement reified twice", (st, RDF.type, RDF.Statement))
        if tr not in g:
            fail("reified statement is not asserted", (st, RDF.type, RDF.Statement))
        by_triple[tr] = st

    edge_props: dict[str, dict] = {}
    for t in sorted(g, key=lambda t: tuple(map(str, t))):
        s, p, o = t
        if t in consumed or isinstance(s, BNode) and s not in statements:
            continue
        if p in objp:
            prop = objp[p]
            eid = f"{prop.name}:{s.n3(nm)}->{o.n3(nm)}"
            edges[eid] = InstanceEdge(eid, prop.name, (node_for(s, prop.domain, t),), (node_for(o, prop.range, t),),
                                      {})
            edge_props[eid] = {}
            consumed.add(t)
    for t in sorted(g, key=lambda t: tuple(map(str, t))):
        s, p, o = t
        if t in consumed or p not in dat:
            continue
        prop = dat[p]
        if s in statements:
            ss, sp, so = statements[s]
            if sp not in objp or objp[sp].name != prop.domain:
                fail(f"{prop.name} annotates a statement that is not {prop.domain}", t)
            target = edge_props[f"{prop.domain}:{ss.n3(nm)}->{so.n3(nm)}"]
        else:
            if r.is_object_property(prop.domain):
                fail(f"{prop.name} belongs on reified {prop.domain} statements", t)
            target = nodes[node_for(s, prop.domain, t)]
        if prop.name in target:
            fail(f"repeated value for single-valued {prop.name}", t)
        if isinstance(prop, AltProperty):
            target[prop.name] = _read_alt(g, prop, o, uri, consumed, fail, t)
        else:
            if not isinstance(o, Literal):
                fail(f"{prop.name} needs a literal", t)
            value = _literal_value(o)
            if not check_value(reg, prop.range, value).ok:
                fail(f"literal does not conform to {prop.range}", t)
            target[prop.name] = value
        consumed.add(t)
    leftovers = [t for t in g if t not in consumed]
    if leftovers:
        fail("triple matches no schema element", sorted(leftovers, key=lambda t: tuple(map(str, t)))[0])

    inst_nodes = {}
    for nid, props in nodes.items():
        rec = reg.get(tgs.node_types[node_type[nid]].property_type)
        inst_nodes[nid] = InstanceNode(nid, node_type[nid], {n: props.get(n) for n, _ in rec.components})
    inst_edges = {}
    for eid, e in edges.items():
        rec = reg.get(tgs.edge_types[e.type].property_type)
        props = edge_props.get(eid, {})
        inst_edges[eid] = InstanceEdge(eid, e.type, e.tails, e.heads, {n: props.get(n) for n, _ in rec.components})
    return TypedGraphInstance(tgs, inst_nodes, inst_edges)


def _read_alt(g, prop: AltProperty, alt, uri, consumed, fail, t):
    if not isinstance(alt, BNode) or (alt, RDF.type, RDF.Alt) not in g:
        fail(f"{prop.name} needs an rdf:Alt blank node", t)
    consumed.add((alt, RDF.type, RDF.Alt))
    items = [None] * prop.size
    for _, p, item in g.triples((alt, None, None)):
        if p == RDF.type:
            continue
        idx = str(p)[len(str(RDF)) + 1:]
        if not str(p).startswith(str(RDF) + "_") or not idx.isdigit() or not 1 <= int(idx) <= prop.size:
            fail(f"{prop.name}: bad alternative slot {p.n3(g.namespace_manager)}", (alt, p, item))
        value = {}
        for _, ip, lit in g.triples((item, None, None)):
            comp = next((c for c, _ in prop.components if uri(c) == ip), None)
            if comp is None or not isinstance(lit, Literal):
                fail(f"{prop.name}: unexpected item triple", (item, ip, lit))
            value[comp] = _literal_value(lit)
            consumed.add((item, ip, lit))
        items[int(idx) - 1] = {c: value.get(c) for c, _ in prop.components}
        consumed.add((alt, p, item))
    return items


def random_rdf_instance(r: RdfsSchema, seed: int, max_per_class: int = 3) -> rdflib.Graph:
    """Data triples conforming to ``r``: typed resources, literals, links and reified edge properties."""
    rng = random.Random(seed)
    uri = _resolver(r)
    g = rdflib.Graph()
    for p, u in r.prefixes:
        g.bind(p, u)
    base = "http://example.org/data#"
    g.bind("d", base)
    members: dict[str, list] = {c: [] for c in r.classes}
    specific = {}
    serial = 0
    for c in r.classes:
        for _ in range(rng.randint(0, max_per_class)):
            serial += 1
            s = URIRef(f"{base}r{serial}")
            g.add((s, RDF.type, uri(c)))
            specific[s] = c
            for k in r.ancestors(c):
                members[k].append(s)
    dtypes = {t.label: t for t in r.datatypes}

    def literal(type_label: str, i: int):
        if type_label in dtypes:
            t = dtypes[type_label]
            lo, hi = t.bounds
            lo = 0 if lo is None else lo
            hi = lo + 1000 if hi is None else hi
            return Literal(rng.randint(int(lo), int(hi)), datatype=uri(type_label))
        if type_label == "integer":
            return Literal(rng.randint(-50, 5000), datatype=XSD.int)
        if type_label == "decimal":
            return Literal(Decimal(rng.randint(0, 99999)) / 100)
        if type_label == "boolean":
            return Literal(rng.random() < 0.5)
        if type_label == "date":
            return Literal(datetime.date(2000, 1, 1) + datetime.timedelta(days=rng.randint(0, 9000)))
        return Literal(f"{rng.choice(('au', 'be', 'ci', 'do', 'el'))}{i}")

    def annotate(subject, owner: str):
        for p in r.datatype_properties:
            if p.domain == owner and rng.random() < 0.7:
                g.add((subject, uri(p.name), literal(p.range, serial)))
        for a in r.alternatives:
            if a.domain != owner:
                continue
            alt = BNode()
            g.add((subject, uri(a.name), alt))
            g.add((alt, RDF.type, RDF.Alt))
            chosen = rng.randrange(a.size)  # exactly one populated alternative
            item = BNode()
            g.add((alt, RDF[f"_{chosen + 1}"], item))
            for pred, t in a.components:
                g.add((item, uri(pred), literal(t, chosen)))

    for s in sorted(specific, key=str):
        for k in r.ancestors(specific[s]):
            annotate(s, k)
    for p in r.object_properties:
        for s in members[p.domain]:
            for o in members[p.range]:
                if rng.random() < 0.3:
                    g.add((s, uri(p.name), o))
                    if any(q.domain == p.name for q in (*r.datatype_properties, *r.alternatives)):
                        st = BNode()
                        for tr in ((RDF.type, RDF.Statement), (RDF.subject, s), (RDF.predicate, uri(p.name)),
                                   (RDF.object, o)):
                            g.add((st, *tr))
                        annotate(st, p.name)
    return g
