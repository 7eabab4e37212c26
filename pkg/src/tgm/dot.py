"""Graphviz DOT rendering of a schema.

Node types are record-shaped nodes listing their properties, much like UML
classes; hyper-nodes also list the node types they contain.  Binary edge
types are arrows labelled with the edge label, kind and the multiplicity at
each end.  Edge types with more than two participations get an intermediate
diamond carrying the label and properties, with one line per participation.
Output is sorted everywhere, so equal schemas render to equal text.
"""

from __future__ import annotations

from .schema import EdgeType, Participation, TypedGraphSchema

_RECORD_SPECIALS = str.maketrans({c: "\\" + c for c in '{}|<>"'})


def _esc(text: str) -> str:
    return text.replace("\\", "\\\\").translate(_RECORD_SPECIALS)


def _plain(text: str) -> str:
    """Escape user text for an ordinary (non-record) quoted label."""
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _quote(escaped: str) -> str:
    return f'"{escaped}"'


def _properties(s: TypedGraphSchema, type_label: str) -> list[str]:
    reg = s.registry
    if type_label not in reg.types:
        return []
    t = reg.get(type_label)
    if t.kind != "record":
        return [f"value: {type_label}"]
    return [f"{name}: {comp}" for name, comp in t.components]


def _node_label(s: TypedGraphSchema, label: str) -> str:
    nt = s.node_types[label]
    parts = [_esc(label)]
    if nt.nested_schema is not None:
        parts[0] += "\\n«hyper-node»"
        parts.append(_esc("contains: " + ", ".join(sorted(nt.nested_schema.node_types))) + "\\l")
    props = _properties(s, nt.property_type)
    if props:
        parts.append("".join(_esc(p) + "\\l" for p in props))
    return "{" + "|".join(parts) + "}"


def _end(p: Participation) -> str:
    role = f"{_plain(p.role)} " if p.role else ""
    return f"{role}{p.multiplicity}"


def _edge_title(e: EdgeType) -> str:
    return _plain(e.label) if e.kind == "plain" else f"{_plain(e.label)} «{e.kind}»"


def to_dot(s: TypedGraphSchema, name: str = "TGS") -> str:
    lines = [f"digraph {_quote(_plain(name))} {{", "  node [shape=record, fontname=Helvetica];",
             "  edge [fontname=Helvetica];"]
    for label in sorted(s.node_types):
        lines.append(f"  {_quote(_plain(label))} [label={_quote(_node_label(s, label))}];")
    for label in sorted(s.edge_types):
        e = s.edge_types[label]
        props = _properties(s, e.property_type)
        if len(e.tail) + len(e.head) == 2:
            t, h = e.tail[0], e.head[0]
            text = _edge_title(e) + "".join("\\n" + _plain(p) for p in props)
            text += f"\\n{_end(t)} → {_end(h)}"
            lines.append(f"  {_quote(_plain(t.node_type))} -> {_quote(_plain(h.node_type))} "
                         f"[label={_quote(text)}];")
            continue
        hub = _plain(f"edge:{label}")
        text = _edge_title(e) + "".join("\\n" + _plain(p) for p in props)
        lines.append(f"  {_quote(hub)} [shape=diamond, label={_quote(text)}];")
        for p in e.tail:
            lines.append(f"  {_quote(_plain(p.node_type))} -> {_quote(hub)} "
                         f"[arrowhead=none, label={_quote(_end(p))}];")
        for p in e.head:
            lines.append(f"  {_quote(hub)} -> {_quote(_plain(p.node_type))} [label={_quote(_end(p))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
