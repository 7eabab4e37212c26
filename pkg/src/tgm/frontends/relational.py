"""Relational DDL subset: parsing, lifting to the supermodel, and CSV instances.

Supported statements are ``CREATE TABLE`` with column types INT/INTEGER,
DECIMAL(p,s), VARCHAR(n), DATE and BOOLEAN, inline or table-level
``PRIMARY KEY`` and ``FOREIGN KEY ... REFERENCES``, ``NOT NULL``/``NULL`` and
``--`` comments.  ``CHECK``, ``UNIQUE`` and ``DEFAULT`` are rejected with
UnsupportedFeature instead of being skipped.

A table whose primary key is exactly the union of two or more foreign keys
is a join table; it lifts to one relationship (hyper-edge) and its foreign
key columns disappear.  Every other foreign key becomes a function edge.
"""

from __future__ import annotations

import csv
import io
import json
import os
import random
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..datatypes import DataType, TypeRegistry, range_of
from ..errors import AmbiguousJoinTable, SchemaSyntaxError, SourceIntegrityViolation, UnsupportedFeature
from ..instance import InstanceEdge, InstanceNode, TypedGraphInstance
from ..schema import TypedGraphSchema
from ..supermodel import SupermodelBuilder, SupermodelSchema


@dataclass(frozen=True)
class Column:
    name: str
    type: str          # SQL spelling, normalised: INT, DECIMAL(p,s), VARCHAR(n), DATE, BOOLEAN
    nullable: bool = True


@dataclass(frozen=True)
class ForeignKey:
    columns: tuple[str, ...]
    table: str
    ref_columns: tuple[str, ...] = ()

    @property
    def name(self) -> str:
        return "_".join(self.columns)


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[Column, ...]
    primary_key: tuple[str, ...] = ()
    foreign_keys: tuple[ForeignKey, ...] = ()

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)

    def fk_columns(self) -> set[str]:
        return {c for fk in self.foreign_keys for c in fk.columns}

    def is_join_table(self) -> bool:
        pk = set(self.primary_key)
        return len(self.foreign_keys) >= 2 and bool(pk) and pk == self.fk_columns()


@dataclass(frozen=True)
class RelationalSchema:
    tables: tuple[Table, ...] = ()

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    def canonical(self) -> str:
        """Order-free structural form: tables, columns and keys sorted."""
        doc = []
        for t in sorted(self.tables, key=lambda t: t.name):
            doc.append({
                "name": t.name,
                "columns": sorted([c.name, c.type, c.nullable] for c in t.columns),
                "pk": sorted(t.primary_key),
                "fks": sorted([list(fk.columns), fk.table] for fk in t.foreign_keys),
            })
        return json.dumps(doc, sort_keys=True)


# tokenizer

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>--[^\n]*)
  | (?P<num>\d+) | (?P<ident>[A-Za-z_][A-Za-z0-9_]*|"[^"]+"|`[^`]+`)
  | (?P<punct>[(),;])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int

    @property
    def upper(self) -> str:
        return self.text.upper()


def _tokenize(text: str) -> list[_Tok]:
    out, pos, line, line_start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise SchemaSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tok = m.group()
            if kind == "ident" and tok[0] in "\"`":
                tok = tok[1:-1]
            out.append(_Tok(kind, tok, line, pos - line_start + 1))
        pos = m.end()
    return out


_UNSUPPORTED = {"CHECK", "UNIQUE", "DEFAULT", "INDEX", "AUTO_INCREMENT", "IDENTITY", "GENERATED"}


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, upper: str | None = None) -> _Tok | None:
        if self.i >= len(self.toks):
            return None
        t = self.toks[self.i]
        if upper is not None and t.upper != upper:
            return None
        return t

    def fail(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek() or (self.toks[-1] if self.toks else _Tok("eof", "", 1, 1))
        raise SchemaSyntaxError(msg, tok.line, tok.col)

    def take(self, upper: str | None = None, kind: str | None = None) -> _Tok:
        t = self.peek()
        if t is None:
            self.fail(f"unexpected end of input, expected {upper or kind or 'token'}")
        if (upper is not None and t.upper != upper) or (kind is not None and t.kind != kind):
            self.fail(f"expected {upper or kind}, found {t.text!r}", t)
        self.i += 1
        return t

    def ident(self) -> str:
        return self.take(kind="ident").text

    def ident_list(self) -> tuple[str, ...]:
        self.take("(")
        names = [self.ident()]
        while self.peek(","):
            self.take(",")
            names.append(self.ident())
        self.take(")")
        return tuple(names)

    def parse(self) -> list[tuple[Table, dict]]:
        tables = []
        while self.peek() is not None:
            if self.peek(";"):
                self.take(";")
                continue
            tables.append(self.create_table())
        return tables

    def column_type(self) -> str:
        t = self.take(kind="ident")
        name = t.upper
        if name in ("INT", "INTEGER"):
            return "INT"
        if name in ("DECIMAL", "NUMERIC"):
            self.take("(")
            p = int(self.take(kind="num").text)
            s = 0
            if self.peek(","):
                self.take(",")
                s = int(self.take(kind="num").text)
            self.take(")")
            if s > p:
                self.fail(f"DECIMAL scale {s} exceeds precision {p}", t)
            return f"DECIMAL({p},{s})"
        if name in ("VARCHAR", "CHAR"):
            self.take("(")
            n = int(self.take(kind="num").text)
            self.take(")")
            return f"VARCHAR({n})"
        if name in ("DATE", "BOOLEAN"):
            return name
        raise UnsupportedFeature(f"column type {t.text} (line {t.line}, column {t.col})")

    def create_table(self) -> tuple[Table, dict]:
        self.take("CREATE")
        self.take("TABLE")
        name_tok = self.take(kind="ident")
        self.take("(")
        columns: list[Column] = []
        pk: tuple[str, ...] = ()
        fks: list[ForeignKey] = []
        where: dict = {"table": name_tok}
        while True:
            t = self.peek()
            if t is None:
                self.fail("unterminated CREATE TABLE")
            if t.upper in _UNSUPPORTED:
                raise UnsupportedFeature(f"{t.text} clause (line {t.line}, column {t.col})")
            if t.upper == "CONSTRAINT":
                self.take()
                self.ident()
                t = self.peek()
            if t.upper == "PRIMARY":
                self.take("PRIMARY")
                self.take("KEY")
                if pk:
                    self.fail("second PRIMARY KEY", t)
                pk = self.ident_list()
                where["pk"] = t
            elif t.upper == "FOREIGN":
                self.take("FOREIGN")
                self.take("KEY")
                cols = self.ident_list()
                ref = self.take("REFERENCES")
                target = self.ident()
                ref_cols = self.ident_list() if self.peek("(") else ()
                fks.append(ForeignKey(cols, target, ref_cols))
                where[("fk", len(fks) - 1)] = ref
            elif t.upper in _UNSUPPORTED:
                raise UnsupportedFeature(f"{t.text} clause (line {t.line}, column {t.col})")
            else:
                cname = self.ident()
                ctype = self.column_type()
                nullable = True
                while True:
                    m = self.peek()
                    if m is None:
                        break
                    if m.upper in _UNSUPPORTED:
                        raise UnsupportedFeature(f"{m.text} clause (line {m.line}, column {m.col})")
                    if m.upper == "NOT":
                        self.take()
                        self.take("NULL")
                        nullable = False
                    elif m.upper == "NULL":
                        self.take()
                    elif m.upper == "PRIMARY":
                        self.take()
                        self.take("KEY")
                        if pk:
                            self.fail("second PRIMARY KEY", m)
                        pk = (cname,)
                        where["pk"] = m
                    elif m.upper == "REFERENCES":
                        self.take()
                        target = self.ident()
                        ref_cols = self.ident_list() if self.peek("(") else ()
                        fks.append(ForeignKey((cname,), target, ref_cols))
                        where[("fk", len(fks) - 1)] = m
                    else:
                        break
                columns.append(Column(cname, ctype, nullable))
            if self.peek(","):
                self.take(",")
                continue
            self.take(")")
            break
        if self.peek(";"):
            self.take(";")
        # key columns are never null
        columns = [Column(c.name, c.type, c.nullable and c.name not in pk) for c in columns]
        return Table(name_tok.text, tuple(columns), pk, tuple(fks)), where


def parse_relational(text: str) -> RelationalSchema:
    """Parse DDL into a RelationalSchema; references are resolved and checked."""
    parsed = _Parser(text).parse()
    names = {}
    for t, where in parsed:
        if t.name in names:
            tok = where["table"]
            raise SchemaSyntaxError(f"table {t.name!r} defined twice", tok.line, tok.col)
        names[t.name] = t
    for t, where in parsed:
        cols = {c.name for c in t.columns}
        if len(cols) != len(t.columns):
            tok = where["table"]
            raise SchemaSyntaxError(f"table {t.name!r} repeats a column name", tok.line, tok.col)
        for c in t.primary_key:
            if c not in cols:
                tok = where.get("pk", where["table"])
                raise SchemaSyntaxError(f"primary key column {c!r} not in table {t.name!r}", tok.line, tok.col)
        for i, fk in enumerate(t.foreign_keys):
            tok = where[("fk", i)]
            for c in fk.columns:
                if c not in cols:
                    raise SchemaSyntaxError(f"foreign key column {c!r} not in table {t.name!r}", tok.line, tok.col)
            target = names.get(fk.table)
            if target is None:
                raise SchemaSyntaxError(f"{t.name}: foreign key references missing table {fk.table!r}",
                                        tok.line, tok.col)
            if not target.primary_key:
                raise SchemaSyntaxError(f"{t.name}: referenced table {fk.table!r} has no primary key",
                                        tok.line, tok.col)
            ref = fk.ref_columns or target.primary_key
            if tuple(ref) != tuple(target.primary_key):
                raise UnsupportedFeature(f"{t.name}: foreign keys must reference the primary key of {fk.table}")
            if len(ref) != len(fk.columns):
                raise SchemaSyntaxError(f"{t.name}: foreign key arity does not match {fk.table} key",
                                        tok.line, tok.col)
    fixed = []
    for t, _ in parsed:
        fks = tuple(ForeignKey(fk.columns, fk.table, fk.ref_columns or names[fk.table].primary_key)
                    for fk in t.foreign_keys)
        fixed.append(Table(t.name, t.columns, t.primary_key, fks))
    return RelationalSchema(tuple(fixed))


def load_relational(path) -> RelationalSchema:
    with open(path, encoding="utf-8") as fh:
        return parse_relational(fh.read())


# types

def sql_type(type_name: str) -> tuple[str, DataType | None]:
    """Data type label for an SQL column type, plus the user type to declare (if any)."""
    if type_name == "INT":
        return "integer", None
    if type_name == "DATE":
        return "date", None
    if type_name == "BOOLEAN":
        return "boolean", None
    m = re.fullmatch(r"VARCHAR\((\d+)\)", type_name)
    if m:
        n = int(m.group(1))
        return f"varchar_{n}", range_of(f"varchar_{n}", "text", 0, n)
    m = re.fullmatch(r"DECIMAL\((\d+),(\d+)\)", type_name)
    if m:
        p, s = int(m.group(1)), int(m.group(2))
        bound = 10 ** (p - s) - 10 ** -s if s else 10 ** p - 1
        return f"decimal_{p}_{s}", range_of(f"decimal_{p}_{s}", "decimal", -bound, bound)
    raise UnsupportedFeature(f"column type {type_name}")


def type_to_sql(label: str) -> str:
    if label == "integer":
        return "INT"
    if label in ("date", "boolean"):
        return label.upper()
    m = re.fullmatch(r"varchar_(\d+)", label)
    if m:
        return f"VARCHAR({m.group(1)})"
    m = re.fullmatch(r"decimal_(\d+)_(\d+)", label)
    if m:
        return f"DECIMAL({m.group(1)},{m.group(2)})"
    raise UnsupportedFeature(f"no SQL column type for {label!r}")


# lifting

def _check_join_shape(t: Table) -> None:
    pk, fkc = set(t.primary_key), t.fk_columns()
    if not pk or not (pk & fkc) or t.is_join_table():
        return
    raise AmbiguousJoinTable(
        f"table {t.name!r}: primary key {sorted(pk)} overlaps foreign key columns {sorted(fkc)} "
        "without being exactly their union over two or more keys; resolve manually")


def lift_relational(r: RelationalSchema) -> SupermodelSchema:
    b = SupermodelBuilder("relational")
    user_types = {}
    for t in r.tables:
        for c in t.columns:
            _, dt = sql_type(c.type)
            if dt is not None:
                user_types[dt.label] = dt
    b.add_types(*user_types.values())
    joins = set()
    for t in r.tables:
        _check_join_shape(t)
        if t.is_join_table():
            joins.add(t.name)
    for t in r.tables:
        for fk in t.foreign_keys:
            if fk.table in joins:
                raise AmbiguousJoinTable(f"{t.name}: foreign key into join table {fk.table!r}")
    for t in r.tables:
        if t.name not in joins:
            b.abstract(t.name)
    for t in r.tables:
        fkc = t.fk_columns()
        if t.name in joins:
            b.relationship(t.name, [(fk.table, 0, "*", ",".join(fk.columns)) for fk in t.foreign_keys])
        for c in t.columns:
            if c.name in fkc:
                continue
            label, _ = sql_type(c.type)
            b.attribute(t.name, c.name, label, key=c.name in t.primary_key and t.name not in joins,
                        optional=c.nullable)
    for t in r.tables:
        if t.name in joins:
            continue
        for fk in t.foreign_keys:
            optional = any(t.column(c).nullable for c in fk.columns)
            b.function(f"{t.name}_{fk.name}", t.name, fk.table, optional=optional, role=",".join(fk.columns))
    return b.build()


def lower_relational(sm: SupermodelSchema) -> RelationalSchema:
    """Render a supermodel schema back into tables (the inverse of lift_relational)."""
    by = sm.by_id()
    tables: dict[str, dict] = {}
    for e in sm.elements:
        if e.kind == "abstract":
            tables[e.label] = {"columns": [], "pk": [], "fks": []}
        elif e.kind == "aggregation" and "type" not in e.payload:
            tables[e.label] = {"columns": [], "pk": [], "fks": [], "members": e.payload["members"]}

    def pk_cols(table: str) -> list[Column]:
        t = tables[table]
        return [c for c in t["columns"] if c.name in t["pk"]]

    def owner_of(ref: str) -> str:
        return by[ref].label

    for e in sm.elements:
        if e.kind == "function" and by[e.payload["target"]].kind == "lexical":
            lex = by[e.payload["target"]]
            owner = owner_of(e.payload["source"])
            tables[owner]["columns"].append(Column(lex.label, type_to_sql(lex.payload["type"]),
                                                   bool(e.payload.get("optional"))))
            if lex.payload.get("key"):
                tables[owner]["pk"].append(lex.label)
        elif e.kind == "function" and by[e.payload["target"]].kind == "aggregation":
            raise UnsupportedFeature("structured values have no relational rendering")
        elif e.kind == "generalization":
            raise UnsupportedFeature("generalization has no relational rendering")
    for e in sm.elements:
        if e.kind == "function" and by[e.payload["target"]].kind == "abstract":
            src, tgt = owner_of(e.payload["source"]), owner_of(e.payload["target"])
            cols = (e.payload.get("role") or f"{tgt}_id").split(",")
            for name, ref in zip(cols, pk_cols(tgt)):
                tables[src]["columns"].append(Column(name, ref.type, bool(e.payload.get("optional"))))
            tables[src]["fks"].append(ForeignKey(tuple(cols), tgt, tuple(tables[tgt]["pk"])))
    for label, t in tables.items():
        for m in t.get("members", []):
            tgt = owner_of(m["ref"])
            cols = (m.get("role") or f"{tgt}_id").split(",")
            for name, ref in zip(cols, pk_cols(tgt)):
                t["columns"].append(Column(name, ref.type, False))
            t["fks"].append(ForeignKey(tuple(cols), tgt, tuple(tables[tgt]["pk"])))
            t["pk"].extend(cols)
    return RelationalSchema(tuple(Table(name, tuple(t["columns"]), tuple(t["pk"]), tuple(t["fks"]))
                                  for name, t in tables.items()))


def render_relational(r: RelationalSchema) -> str:
    out = []
    for t in r.tables:
        lines = []
        for c in t.columns:
            null = "" if c.nullable else " NOT NULL"
            lines.append(f"  {c.name} {c.type}{null}")
        if t.primary_key:
            lines.append(f"  PRIMARY KEY ({', '.join(t.primary_key)})")
        for fk in t.foreign_keys:
            lines.append(f"  FOREIGN KEY ({', '.join(fk.columns)}) REFERENCES {fk.table} ({', '.join(fk.ref_columns)})")
        out.append(f"CREATE TABLE {t.name} (\n" + ",\n".join(lines) + "\n);")
    return "\n\n".join(out) + ("\n" if out else "")


# instances

Rows = Mapping[str, Sequence[Mapping[str, str]]]


def _convert(col: Column, raw, locus: str):
    if raw is None or raw == "":
        if not col.nullable:
            raise SourceIntegrityViolation(f"column {col.name} is NOT NULL", locus)
        return None
    try:
        if col.type == "INT":
            return int(raw)
        if col.type.startswith("DECIMAL"):
            return float(raw)
        if col.type == "BOOLEAN":
            low = str(raw).strip().lower()
            if low not in ("true", "false", "1", "0"):
                raise ValueError(raw)
            return low in ("true", "1")
        if col.type == "DATE":
            import datetime
            return datetime.date.fromisoformat(str(raw)).isoformat()
    except ValueError:
        raise SourceIntegrityViolation(f"column {col.name}: {raw!r} is not a {col.type}", locus) from None
    text = str(raw)
    m = re.fullmatch(r"VARCHAR\((\d+)\)", col.type)
    if m and len(text) > int(m.group(1)):
        raise SourceIntegrityViolation(f"column {col.name}: value longer than {m.group(1)}", locus)
    return text


def _key(t: Table, row: Mapping, cols: Sequence[str]) -> str:
    return "|".join(str(row[c]) for c in cols)


def check_relational_rows(r: RelationalSchema, rows: Rows) -> dict[str, list[dict]]:
    """Source-side integrity: types, NOT NULL, unique keys, resolvable foreign keys.

    Returns the typed rows; raises SourceIntegrityViolation with a row locus.
    """
    typed: dict[str, list[dict]] = {}
    keys: dict[str, set[str]] = {}
    for t in r.tables:
        out = []
        seen = set()
        for i, raw in enumerate(rows.get(t.name, [])):
            locus = f"{t.name}.csv row {i + 1}"
            unknown = set(raw) - {c.name for c in t.columns}
            if unknown:
                raise SourceIntegrityViolation(f"unknown columns {sorted(unknown)}", locus)
            row = {c.name: _convert(c, raw.get(c.name), locus) for c in t.columns}
            if t.primary_key:
                k = _key(t, row, t.primary_key)
                if k in seen:
                    raise SourceIntegrityViolation(f"duplicate primary key {k}", locus)
                seen.add(k)
            out.append(row)
        typed[t.name] = out
        keys[t.name] = seen
    for t in r.tables:
        for i, row in enumerate(typed[t.name]):
            for fk in t.foreign_keys:
                vals = [row[c] for c in fk.columns]
                if any(v is None for v in vals):
                    continue
                if "|".join(map(str, vals)) not in keys[fk.table]:
                    raise SourceIntegrityViolation(
                        f"foreign key {fk.name} -> {fk.table} does not resolve ({'|'.join(map(str, vals))})",
                        f"{t.name}.csv row {i + 1}")
    return typed


def map_relational_instance(r: RelationalSchema, rows: Rows, tgs: TypedGraphSchema | None = None
                            ) -> TypedGraphInstance:
    """Rows become nodes, foreign key values function edges, join rows hyper-edges."""
    if tgs is None:
        from ..supermodel import translate
        tgs, _ = translate(lift_relational(r))
    typed = check_relational_rows(r, rows)
    nodes: dict[str, InstanceNode] = {}
    edges: dict[str, InstanceEdge] = {}

    def node_id(table: str, values) -> str:
        return f"{table}:{'|'.join(map(str, values))}"

    for t in r.tables:
        fkc = t.fk_columns()
        for i, row in enumerate(typed[t.name]):
            props = {c.name: row[c.name] for c in t.columns if c.name not in fkc and row[c.name] is not None}
            key_cols = t.primary_key or tuple(c.name for c in t.columns)
            if t.is_join_table():
                ends = [node_id(fk.table, [row[c] for c in fk.columns]) for fk in t.foreign_keys]
                eid = node_id(t.name, [row[c] for c in key_cols])
                edges[eid] = InstanceEdge(eid, t.name, tuple(ends[:1]), tuple(ends[1:]), props)
                continue
            nid = node_id(t.name, [row[c] for c in key_cols]) if t.primary_key else f"{t.name}:#{i + 1}"
            nodes[nid] = InstanceNode(nid, t.name, props)
            for fk in t.foreign_keys:
                vals = [row[c] for c in fk.columns]
                if any(v is None for v in vals):
                    continue
                label = f"{t.name}_{fk.name}"
                eid = f"{label}:{nid}"
                edges[eid] = InstanceEdge(eid, label, (nid,), (node_id(fk.table, vals),), {})
    return TypedGraphInstance(tgs, nodes, edges)


def load_csv_rows(directory, r: RelationalSchema) -> dict[str, list[dict]]:
    """Read ``<table>.csv`` for every table that has a file; missing files mean no rows."""
    rows = {}
    for t in r.tables:
        path = os.path.join(directory, f"{t.name}.csv")
        if not os.path.exists(path):
            rows[t.name] = []
            continue
        with open(path, newline="", encoding="utf-8") as fh:
            rows[t.name] = list(csv.DictReader(fh))
    return rows


def rows_to_csv(r: RelationalSchema, rows: Rows) -> dict[str, str]:
    out = {}
    for t in r.tables:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=[c.name for c in t.columns], lineterminator="\n")
        w.writeheader()
        for row in rows.get(t.name, []):
            w.writerow({k: ("" if v is None else v) for k, v in row.items()})
        out[t.name] = buf.getvalue()
    return out


def random_relational_rows(r: RelationalSchema, seed: int, max_rows: int = 6) -> dict[str, list[dict]]:
    """Random CSV-style rows (strings) that respect keys, NOT NULL and foreign keys."""
    rng = random.Random(seed)
    order = _dependency_order(r)
    rows: dict[str, list[dict]] = {}
    keys: dict[str, list[tuple]] = {}

    def value(col: Column, serial: int):
        if col.type == "INT":
            return str(serial)
        if col.type.startswith("DECIMAL"):
            p, s = map(int, re.findall(r"\d+", col.type))
            hi = 10 ** (p - s) - 1
            return f"{rng.uniform(0, min(hi, 9999)):.{s}f}" if s else str(rng.randint(0, min(hi, 9999)))
        if col.type == "DATE":
            return f"20{rng.randint(10, 29)}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}"
        if col.type == "BOOLEAN":
            return rng.choice(["true", "false"])
        n = int(re.findall(r"\d+", col.type)[0])
        word = f"{rng.choice(['ann', 'bob', 'cy', 'dee', 'eve'])}{serial}"
        return word[:n]

    for name in order:
        t = r.table(name)
        fkc = t.fk_columns()
        out = []
        used = set()
        target = rng.randint(0, max_rows)
        for serial in range(1, target * 3 + 1):
            if len(out) >= target:
                break
            row = {}
            for fk in t.foreign_keys:
                pool = keys.get(fk.table, [])
                nullable = any(t.column(c).nullable for c in fk.columns)
                if not pool or (nullable and rng.random() < 0.25):
                    if not nullable:
                        row = None
                        break
                    for c in fk.columns:
                        row[c] = ""
                    continue
                for c, v in zip(fk.columns, rng.choice(pool)):
                    row[c] = v
            if row is None:
                break
            for c in t.columns:
                if c.name in fkc:
                    continue
                if c.nullable and rng.random() < 0.2:
                    row[c.name] = ""
                else:
                    row[c.name] = value(c, serial)
            if t.primary_key:
                k = tuple(row[c] for c in t.primary_key)
                if k in used:
                    continue
                used.add(k)
            out.append(row)
        rows[name] = out
        if t.primary_key:
            keys[name] = [tuple(row[c] for c in t.primary_key) for row in out]
    return rows


def _dependency_order(r: RelationalSchema) -> list[str]:
    done: list[str] = []
    pending = [t.name for t in r.tables]
    while pending:
        progressed = False
        for name in list(pending):
            t = r.table(name)
            if all(fk.table in done or fk.table == name for fk in t.foreign_keys):
                done.append(name)
                pending.remove(name)
                progressed = True
        if not progressed:
            done.extend(pending)
            break
    return done
