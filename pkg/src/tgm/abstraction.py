"""Schema abstraction: folding node-type groups into hyper-nodes and back.

Folding replaces every group of node types by one hyper-node whose nested
schema is the sub-schema the group induces.  Edges that cross group
boundaries are re-targeted at the hyper-nodes; all crossing edges with the
same signature (the sequence of hyper-node/node labels at their ends) merge
into one hyper-edge whose multiplicity at each end is the most general
multiplicity of the merged ends.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .constraints import ConstraintSyntaxError, typecheck
from .datatypes import EMPTY, record
from .errors import DanglingLabel, FoldError, NotAHyperNode, OverlappingGroups, TgmError
from .schema import (Constraint, EdgeType, Multiplicity, NodeType, Participation, TypedGraphSchema,
                     _edge_json, most_general_multiplicity)


class LossyUnfold(UserWarning):
    """Unfolding without a fold report cannot split merged hyper-edges."""


class MixedKind(UserWarning):
    """Edges of different kinds were merged into one plain hyper-edge."""


@dataclass(frozen=True)
class Aggregate:
    group: str
    name: str
    count_of: str
    type: str = "integer"


@dataclass(frozen=True)
class GroupingSpec:
    groups: Mapping[str, Sequence[str]] = field(default_factory=dict)
    aggregates: Sequence[Aggregate] = ()

    @classmethod
    def from_json(cls, d: Mapping) -> GroupingSpec:
        aggs = tuple(Aggregate(a["group"], a["name"], a["count_of"], a.get("type", "integer"))
                     for a in d.get("aggregates", []))
        return cls({g: tuple(ms) for g, ms in d.get("groups", {}).items()}, aggs)

    def to_json(self) -> dict:
        return {"groups": {g: list(ms) for g, ms in self.groups.items()},
                "aggregates": [{"group": a.group, "name": a.name, "count_of": a.count_of, "type": a.type}
                               for a in self.aggregates]}


def load_grouping(path) -> GroupingSpec:
    with open(path, encoding="utf-8") as fh:
        return GroupingSpec.from_json(json.load(fh))


@dataclass(frozen=True)
class MergedEdge:
    label: str
    sources: tuple[str, ...]
    kind: str
    tail: tuple[Participation, ...]
    head: tuple[Participation, ...]

    def to_json(self) -> dict:
        return {"label": self.label, "sources": list(self.sources), "kind": self.kind,
                "tail": [p.to_json() for p in self.tail], "head": [p.to_json() for p in self.head]}


@dataclass(frozen=True)
class FoldReport:
    """What a fold did, with enough of the input kept to undo it exactly."""
    groups: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    merged_edges: tuple[MergedEdge, ...] = ()
    original_edges: Mapping[str, EdgeType] = field(default_factory=dict)
    removed_constraints: tuple[Constraint, ...] = ()
    added_types: tuple[str, ...] = ()
    aggregates: tuple[Aggregate, ...] = ()

    def to_json(self) -> dict:
        return {
            "groups": {g: list(ms) for g, ms in sorted(self.groups.items())},
            "merged_edges": [m.to_json() for m in self.merged_edges],
            "original_edges": [_edge_json(self.original_edges[k]) for k in sorted(self.original_edges)],
            "removed_constraints": [{"label": c.label, "scope": c.scope, "expr": c.expression}
                                    for c in self.removed_constraints],
            "added_types": list(self.added_types),
            "aggregates": [{"group": a.group, "name": a.name, "count_of": a.count_of, "type": a.type}
                           for a in self.aggregates],
        }

    @classmethod
    def from_json(cls, d: Mapping) -> FoldReport:
        def parts(xs):
            return tuple(Participation.from_json(p) for p in xs)

        originals = {e["label"]: EdgeType(e["label"], e.get("properties", EMPTY), e.get("kind", "plain"),
                                          parts(e["tail"]), parts(e["head"]))
                     for e in d.get("original_edges", [])}
        return cls(
            {g: tuple(ms) for g, ms in d.get("groups", {}).items()},
            tuple(MergedEdge(m["label"], tuple(m["sources"]), m["kind"], parts(m["tail"]), parts(m["head"]))
                  for m in d.get("merged_edges", [])),
            originals,
            tuple(Constraint(c["label"], c["scope"], c["expr"]) for c in d.get("removed_constraints", [])),
            tuple(d.get("added_types", [])),
            tuple(Aggregate(a["group"], a["name"], a["count_of"], a.get("type", "integer"))
                  for a in d.get("aggregates", [])),
        )


def _check_spec(s: TypedGraphSchema, spec: GroupingSpec) -> dict[str, str]:
    owner: dict[str, str] = {}
    for g in sorted(spec.groups):
        for label in spec.groups[g]:
            if label not in s.node_types:
                raise DanglingLabel(f"group {g!r} names unknown node type {label!r}")
            if label in owner and owner[label] != g:
                raise OverlappingGroups(f"node type {label!r} is in groups {owner[label]!r} and {g!r}")
            owner[label] = g
    for g in spec.groups:
        clash = (g in s.node_types and owner.get(g) != g) or g in s.edge_types
        if clash:
            raise FoldError(f"group label {g!r} collides with an existing schema label")
    for a in spec.aggregates:
        if a.group not in spec.groups:
            raise DanglingLabel(f"aggregate {a.name!r} refers to unknown group {a.group!r}")
        if a.count_of not in s.edge_types:
            raise DanglingLabel(f"aggregate {a.name!r} counts unknown edge type {a.count_of!r}")
        if a.type not in s.registry:
            raise DanglingLabel(f"aggregate {a.name!r} has unknown type {a.type!r}")
    return owner


def _constraint_ok(s: TypedGraphSchema, c: Constraint) -> bool:
    if c.scope in s.node_types:
        rec, is_node = s.node_types[c.scope].property_type, True
    elif c.scope in s.edge_types:
        rec, is_node = s.edge_types[c.scope].property_type, False
    else:
        return False
    try:
        typecheck(c.expression, s.registry, rec, is_node=is_node, edge_labels=list(s.edge_types))
    except (ConstraintSyntaxError, TgmError):
        return False
    return True


def _prune(s: TypedGraphSchema, removed: list[Constraint]) -> TypedGraphSchema:
    keep = {}
    for label in sorted(s.constraints):
        c = s.constraints[label]
        if _constraint_ok(s, c):
            keep[label] = c
        else:
            removed.append(c)
    return s.with_(constraints=keep)


def fold(s: TypedGraphSchema, spec: GroupingSpec) -> tuple[TypedGraphSchema, FoldReport]:
    """Collapse each group into a hyper-node and merge crossing edges into hyper-edges."""
    owner = _check_spec(s, spec)
    if not spec.groups:
        return s, FoldReport()

    def image(label: str) -> str:
        return owner.get(label, label)

    reg = s.registry
    added = []
    new_types = []
    for g in sorted(spec.groups):
        comps = [(a.name, a.type) for a in spec.aggregates if a.group == g]
        new_types.append(record(f"{g}_props", comps))
        if f"{g}_props" not in reg:
            added.append(f"{g}_props")
    reg = reg.register(*new_types)

    intra: dict[str, list[EdgeType]] = {g: [] for g in spec.groups}
    crossing: dict[tuple, list[EdgeType]] = {}
    passthrough: list[EdgeType] = []
    for label in sorted(s.edge_types):
        e = s.edge_types[label]
        groups_hit = {owner.get(n) for n in e.node_types()}
        if len(groups_hit) == 1 and None not in groups_hit:
            intra[groups_hit.pop()].append(e)
        elif groups_hit == {None}:
            passthrough.append(e)
        else:
            sig = (tuple(image(p.node_type) for p in e.tail), tuple(image(p.node_type) for p in e.head))
            crossing.setdefault(sig, []).append(e)

    removed: list[Constraint] = []
    nodes = [n for n in s.node_types.values() if n.label not in owner]
    for g in sorted(spec.groups):
        members = set(spec.groups[g])
        member_edges = {e.label for e in intra[g]}
        inner_cons = [c for c in s.constraints.values() if c.scope in members or c.scope in member_edges]
        nested = TypedGraphSchema.build(reg, [s.node_types[m] for m in sorted(members)], intra[g], inner_cons)
        nested = _prune(nested, removed)
        nodes.append(NodeType(g, f"{g}_props", nested))

    merged: list[MergedEdge] = []
    edges = list(passthrough)
    originals: dict[str, EdgeType] = {}
    for sig in sorted(crossing):
        group_edges = crossing[sig]
        for e in group_edges:
            originals[e.label] = e
        label = "/".join(sorted(e.label for e in group_edges))
        kinds = sorted({e.kind for e in group_edges})
        kind = kinds[0] if len(kinds) == 1 else "plain"
        if len(kinds) > 1:
            warnings.warn(f"{label}: merged edges of kinds {kinds}; result is plain", MixedKind, stacklevel=2)

        def side(which: str) -> tuple[Participation, ...]:
            ends = [getattr(e, which) for e in group_edges]
            labels = sig[0] if which == "tail" else sig[1]
            dup = len(set(labels)) != len(labels)
            out = []
            for i, lab in enumerate(labels):
                m = most_general_multiplicity(ps[i].multiplicity for ps in ends)
                roles = {ps[i].role for ps in ends}
                role = roles.pop() if len(roles) == 1 else None
                if role is None and dup:
                    role = f"{which}{i}"
                out.append(Participation(lab, m, role))
            return tuple(out)

        tail, head = side("tail"), side("head")
        props = group_edges[0].property_type if len(group_edges) == 1 else EMPTY
        edges.append(EdgeType(label, props, kind, tail, head))
        merged.append(MergedEdge(label, tuple(sorted(e.label for e in group_edges)), kind, tail, head))

    intra_labels = {e.label for es in intra.values() for e in es}
    outer_cons = [c for c in s.constraints.values() if c.scope not in owner and c.scope not in intra_labels]
    out = TypedGraphSchema.build(reg, nodes, edges, outer_cons)
    out = _prune(out, removed)
    report = FoldReport(
        {g: tuple(sorted(spec.groups[g])) for g in spec.groups},
        tuple(merged), originals,
        tuple(sorted(removed, key=lambda c: c.label)),
        tuple(added),
        tuple(spec.aggregates),
    )
    return out, report


def _expand(s: TypedGraphSchema, group: str) -> tuple[list[NodeType], list[EdgeType], list[Constraint]]:
    inner = s.node_types[group].nested_schema
    return list(inner.node_types.values()), list(inner.edge_types.values()), list(inner.constraints.values())


def unfold(s: TypedGraphSchema, group: str, report: FoldReport | None = None) -> TypedGraphSchema:
    """Replace hyper-node ``group`` with its nested sub-schema.

    With the fold report the original crossing edges come back exactly (and
    are re-merged for any groups that stay folded); without it, hyper-edges
    stay merged and a LossyUnfold warning is issued.
    """
    nt = s.node_types.get(group)
    if nt is None or nt.nested_schema is None:
        raise NotAHyperNode(f"{group!r} is not a hyper-node")
    if report is not None and group in report.groups:
        return _unfold_exact(s, group, report)

    warnings.warn(f"unfolding {group!r} without its fold report: merged hyper-edges stay merged",
                  LossyUnfold, stacklevel=2)
    inner_nodes, inner_edges, inner_cons = _expand(s, group)
    members = sorted(n.label for n in inner_nodes)
    nodes = [n for n in s.node_types.values() if n.label != group] + inner_nodes
    edges = list(inner_edges)
    for e in s.edge_types.values():
        if group not in e.node_types():
            edges.append(e)
            continue

        def widen(ps):
            out = []
            for i, p in enumerate(ps):
                if p.node_type != group:
                    out.append(p)
                    continue
                for m in members:
                    out.append(Participation(m, Multiplicity(0, p.multiplicity.max), p.role))
            return tuple(out)

        edges.append(EdgeType(e.label, e.property_type, e.kind, widen(e.tail), widen(e.head)))
    cons = list(s.constraints.values()) + inner_cons
    return TypedGraphSchema.build(s.registry, nodes, edges, cons)


def _unfold_exact(s: TypedGraphSchema, group: str, report: FoldReport) -> TypedGraphSchema:
    still = [g for g in report.groups if g in s.node_types and s.node_types[g].nested_schema is not None]
    # rebuild the fully detailed schema, then fold the groups that remain
    originals = set(report.original_edges)

    def fold_image(label: str) -> bool:
        # merged edges, including re-merges of a subset after an earlier partial unfold
        return all(part in originals for part in label.split("/"))

    nodes = [n for n in s.node_types.values() if n.label not in still]
    edges = [e for e in s.edge_types.values() if not fold_image(e.label)]
    cons = list(s.constraints.values())
    for g in still:
        inner_nodes, inner_edges, inner_cons = _expand(s, g)
        nodes += inner_nodes
        edges += inner_edges
        cons += inner_cons
    edges += list(report.original_edges.values())
    cons += list(report.removed_constraints)
    detailed = TypedGraphSchema.build(s.registry.without(report.added_types), nodes, edges, cons)
    remaining = [g for g in still if g != group]
    if not remaining:
        return detailed
    spec = GroupingSpec({g: report.groups[g] for g in remaining},
                        tuple(a for a in report.aggregates if a.group in remaining))
    folded, _ = fold(detailed, spec)
    return folded
