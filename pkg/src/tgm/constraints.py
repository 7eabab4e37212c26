"""Integrity-constraint language: parser, static checker and evaluator.

Grammar::

    expr     := or_expr
    or_expr  := and_expr {"or" and_expr}
    and_expr := cmp {"and" cmp}
    cmp      := term [("="|"!="|"<"|"<="|">"|">=") term]
    term     := literal | path | "count" "(" edge_label ")"
              | "unique" "(" path {"," path} ")" | "xor" "(" path {"," path} ")"
    path     := ident {"." (ident | index)}

A path resolves inside the properties of the element the constraint is
scoped to.  ``count`` counts incident edges by label, ``unique`` holds when
no other element of the same type carries the same value (tuple) and ``xor``
holds when exactly one of its paths is present and not false; a single path
that resolves to a collection has its members taken as the alternatives.
"""

from __future__ import annotations

import datetime
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Mapping, Sequence

from .datatypes import COLLECTION_KINDS, TypeRegistry, _as_date
from .errors import ConstraintSyntaxError, EvaluationError

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>-?\d+(?:\.\d+)?)
  | (?P<str>"(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*')
  | (?P<op><=|>=|!=|=|<|>)
  | (?P<punct>[(),.])
  | (?P<ident>[A-Za-z_][\w:/\-]*)
""", re.VERBOSE)

_KEYWORDS = {"or", "and", "count", "unique", "xor", "true", "false"}


@dataclass(frozen=True)
class Lit:
    value: object


@dataclass(frozen=True)
class Path:
    segments: tuple


@dataclass(frozen=True)
class Count:
    edge_label: str


@dataclass(frozen=True)
class Unique:
    paths: tuple[Path, ...]


@dataclass(frozen=True)
class Xor:
    paths: tuple[Path, ...]


@dataclass(frozen=True)
class Cmp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class BoolOp:
    op: str
    items: tuple


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ConstraintSyntaxError(f"unexpected character {text[pos]!r} at {pos}")
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, value=None):
        if self.i >= len(self.toks):
            return None
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            return None
        return tok

    def take(self, value=None):
        tok = self.peek(value)
        if tok is None:
            want = f" {value!r}" if value else ""
            raise ConstraintSyntaxError(f"expected{want} in {self.text!r} at token {self.i}")
        self.i += 1
        return tok

    def parse(self):
        node = self.or_expr()
        if self.i != len(self.toks):
            raise ConstraintSyntaxError(f"trailing input {self.toks[self.i][1]!r} in {self.text!r}")
        return node

    def or_expr(self):
        items = [self.and_expr()]
        while self.peek("or"):
            self.take()
            items.append(self.and_expr())
        return items[0] if len(items) == 1 else BoolOp("or", tuple(items))

    def and_expr(self):
        items = [self.cmp()]
        while self.peek("and"):
            self.take()
            items.append(self.cmp())
        return items[0] if len(items) == 1 else BoolOp("and", tuple(items))

    def cmp(self):
        left = self.term()
        tok = self.peek()
        if tok and tok[0] == "op":
            self.take()
            return Cmp(tok[1], left, self.term())
        return left

    def term(self):
        tok = self.take()
        kind, val, _ = tok
        if kind == "num":
            return Lit(float(val) if "." in val else int(val))
        if kind == "str":
            return Lit(bytes(val[1:-1], "utf-8").decode("unicode_escape"))
        if kind == "ident":
            if val in ("true", "false"):
                return Lit(val == "true")
            if val == "count":
                self.take("(")
                label = self.take()
                if label[0] != "ident":
                    raise ConstraintSyntaxError(f"count() needs an edge label in {self.text!r}")
                self.take(")")
                return Count(label[1])
            if val in ("unique", "xor"):
                self.take("(")
                paths = [self.path(self.take())]
                while self.peek(","):
                    self.take()
                    paths.append(self.path(self.take()))
                self.take(")")
                return (Unique if val == "unique" else Xor)(tuple(paths))
            if val in _KEYWORDS:
                raise ConstraintSyntaxError(f"misplaced keyword {val!r} in {self.text!r}")
            return self.path(tok)
        raise ConstraintSyntaxError(f"unexpected {val!r} in {self.text!r}")

    def path(self, first):
        if first[0] != "ident" or first[1] in _KEYWORDS:
            raise ConstraintSyntaxError(f"expected a property path in {self.text!r}")
        segs = [first[1]]
        while self.peek("."):
            self.take()
            tok = self.take()
            if tok[0] == "ident":
                segs.append(tok[1])
            elif tok[0] == "num" and tok[1].isdigit():
                segs.append(int(tok[1]))
            else:
                raise ConstraintSyntaxError(f"bad path segment {tok[1]!r} in {self.text!r}")
        return Path(tuple(segs))


@lru_cache(maxsize=1024)
def parse_constraint(text: str):
    return _Parser(text).parse()


# static checking

def _category(registry: TypeRegistry, label: str) -> str:
    t = registry[registry.resolve_optional(label)]
    if t.kind == "primitive":
        base = t.label
    elif t.kind == "range":
        base = t.element
    elif t.kind == "enum":
        return "enum"
    elif t.kind == "union":
        return "any"
    else:
        return "composite"
    return {"integer": "number", "decimal": "number"}.get(base, base)


def _resolve_static(registry: TypeRegistry, record_label: str, path: Path) -> str:
    cur = record_label
    for seg in path.segments:
        t = registry[registry.resolve_optional(cur)]
        if isinstance(seg, int):
            if t.kind not in COLLECTION_KINDS:
                raise ConstraintSyntaxError(f"index {seg} applied to non-collection {t.label}")
            if t.kind == "array" and seg >= t.length:
                raise ConstraintSyntaxError(f"index {seg} outside array {t.label} of length {t.length}")
            cur = t.element
        else:
            if t.kind != "record" or t.component_type(seg) is None:
                raise ConstraintSyntaxError(f"{t.label} has no property {seg!r}")
            cur = t.component_type(seg)
    return cur


def _static(node, ctx) -> str:
    registry, record_label, is_node, edge_labels = ctx
    if isinstance(node, Lit):
        v = node.value
        if isinstance(v, bool):
            return "boolean"
        return "number" if isinstance(v, (int, float)) else "text"
    if isinstance(node, Path):
        return _category(registry, _resolve_static(registry, record_label, node))
    if isinstance(node, Count):
        if not is_node:
            raise ConstraintSyntaxError("count() is only defined on node types")
        if node.edge_label not in edge_labels:
            raise ConstraintSyntaxError(f"count() of unknown edge type {node.edge_label!r}")
        return "number"
    if isinstance(node, (Unique, Xor)):
        for p in node.paths:
            _resolve_static(registry, record_label, p)
        return "boolean"
    if isinstance(node, Cmp):
        a, b = _static(node.left, ctx), _static(node.right, ctx)
        if "any" in (a, b) or "enum" in (a, b):
            return "boolean"
        if a == "composite" or b == "composite":
            if node.op not in ("=", "!=") or a != b:
                raise ConstraintSyntaxError("composite values only support = and !=")
            return "boolean"
        comparable = a == b or {a, b} == {"date", "text"}
        if not comparable:
            raise ConstraintSyntaxError(f"cannot compare {a} with {b}")
        if a == "boolean" and node.op not in ("=", "!="):
            raise ConstraintSyntaxError("booleans only support = and !=")
        return "boolean"
    if isinstance(node, BoolOp):
        for item in node.items:
            if _static(item, ctx) not in ("boolean", "any"):
                raise ConstraintSyntaxError(f"operand of {node.op} is not boolean")
        return "boolean"
    raise ConstraintSyntaxError(f"unknown expression node {node!r}")


def typecheck(expression: str, registry: TypeRegistry, record_label: str,
              *, is_node: bool, edge_labels: Sequence[str] = ()) -> None:
    """Raise ConstraintSyntaxError unless the expression is a well-typed boolean."""
    ast = parse_constraint(expression)
    kind = _static(ast, (registry, record_label, is_node, set(edge_labels)))
    if kind not in ("boolean", "any"):
        raise ConstraintSyntaxError(f"{expression!r} does not evaluate to a boolean")


# evaluation

class _Absent:
    def __repr__(self):
        return "<absent>"


ABSENT = _Absent()


def resolve(props, path: Path):
    cur = props
    for seg in path.segments:
        if isinstance(seg, int):
            if not isinstance(cur, (list, tuple)) or seg >= len(cur):
                return ABSENT
            cur = cur[seg]
        else:
            if not isinstance(cur, Mapping) or seg not in cur:
                return ABSENT
            cur = cur[seg]
        if cur is None:
            return ABSENT
    return cur


def _present(v) -> bool:
    return v is not ABSENT and v is not None and v is not False


def _norm(v):
    if isinstance(v, datetime.date):
        return v.isoformat()
    return v


_OPS: dict[str, Callable] = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


@dataclass
class Env:
    """What an expression may see: own properties and one-hop edge counts."""
    properties: object
    count: Callable[[str], int] = lambda label: 0
    unique: Callable[[tuple], bool] = lambda values: True


def _eval(node, env: Env):
    if isinstance(node, Lit):
        return node.value
    if isinstance(node, Path):
        v = resolve(env.properties, node)
        if v is ABSENT:
            raise EvaluationError(f"path {'.'.join(map(str, node.segments))} is absent")
        return v
    if isinstance(node, Count):
        return env.count(node.edge_label)
    if isinstance(node, Unique):
        values = tuple(resolve(env.properties, p) for p in node.paths)
        if any(v is ABSENT for v in values):
            return True
        return env.unique(values)
    if isinstance(node, Xor):
        if len(node.paths) == 1:
            v = resolve(env.properties, node.paths[0])
            if isinstance(v, (list, tuple)):
                return sum(1 for x in v if _present(x)) == 1
            return _present(v)
        return sum(1 for p in node.paths if _present(resolve(env.properties, p))) == 1
    if isinstance(node, Cmp):
        a, b = _norm(_eval(node.left, env)), _norm(_eval(node.right, env))
        if _as_date(a) is not None and _as_date(b) is not None and isinstance(a, str) and isinstance(b, str):
            a, b = _as_date(a), _as_date(b)
        try:
            return bool(_OPS[node.op](a, b))
        except TypeError as exc:
            raise EvaluationError(f"cannot compare {a!r} {node.op} {b!r}") from exc
    if isinstance(node, BoolOp):
        if node.op == "and":
            return all(_truth(_eval(i, env)) for i in node.items)
        return any(_truth(_eval(i, env)) for i in node.items)
    raise EvaluationError(f"unknown expression node {node!r}")


def _truth(v) -> bool:
    if not isinstance(v, bool):
        raise EvaluationError(f"{v!r} is not a boolean")
    return v


def evaluate(expression, env: Env) -> bool:
    ast = parse_constraint(expression) if isinstance(expression, str) else expression
    return _truth(_eval(ast, env))
