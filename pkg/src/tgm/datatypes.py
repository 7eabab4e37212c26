"""Data type universe shared by node types, edge types and properties.

A type is a label plus one of seven definition shapes: primitive, bounded
range, enumeration, record, collection (array/list/set/bag), optional wrapper
and union.  Types are nominal: two identically shaped types with different
labels are different types.

Values are plain Python/JSON data: ``int``/``float`` numbers, ``str``,
``bool``, ISO date strings (or ``datetime.date``), ``dict`` for records,
``list`` for collections and ``None`` for an absent optional.
"""

from __future__ import annotations

import datetime
import itertools
import json
import math
import random
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any, Iterable, Mapping

from .errors import (
    DanglingReference,
    DuplicateLabel,
    InfiniteType,
    InvalidTypeDefinition,
    UnknownType,
)
from .verdict import Verdict, Violation

PRIMITIVES = ("integer", "decimal", "text", "boolean", "date")
COLLECTION_KINDS = ("array", "list", "set", "bag")
KINDS = ("primitive", "range", "enum", "record", *COLLECTION_KINDS, "optional", "union")
UNBOUNDED = "*"
ANY_TYPE = "anyType"
EMPTY = "Empty"


@dataclass(frozen=True)
class DataType:
    label: str
    kind: str
    components: tuple[tuple[str, str], ...] = ()
    element: str | None = None
    bounds: tuple | None = None
    length: int | None = None
    variants: tuple = ()

    def references(self) -> tuple[str, ...]:
        if self.kind == "record":
            return tuple(t for _, t in self.components)
        if self.kind == "union":
            return tuple(self.variants)
        if self.kind in ("range", "optional", *COLLECTION_KINDS):
            return (self.element,)
        return ()

    def component_type(self, name: str) -> str | None:
        for n, t in self.components:
            if n == name:
                return t
        return None

    def to_json(self) -> dict:
        out: dict[str, Any] = {"label": self.label, "kind": self.kind}
        if self.kind == "record":
            out["components"] = [{"name": n, "type": t} for n, t in self.components]
        elif self.kind == "enum":
            out["variants"] = list(self.variants)
        elif self.kind == "union":
            out["variants"] = list(self.variants)
        elif self.kind == "range":
            out["element"] = self.element
            out["bounds"] = list(self.bounds)
        elif self.kind == "array":
            out["element"] = self.element
            out["length"] = self.length
        elif self.kind in COLLECTION_KINDS:
            out["element"] = self.element
            out["bounds"] = list(self.bounds)
        elif self.kind == "optional":
            out["element"] = self.element
        return out

    @classmethod
    def from_json(cls, d: Mapping) -> DataType:
        kind = d["kind"]
        label = d["label"]
        if kind == "record":
            comps = tuple((c["name"], c["type"]) for c in d.get("components", []))
            return cls(label, kind, components=comps)
        if kind in ("enum", "union"):
            return cls(label, kind, variants=tuple(d.get("variants", [])))
        if kind == "range":
            return cls(label, kind, element=d["element"], bounds=tuple(d.get("bounds", (None, None))))
        if kind == "array":
            return cls(label, kind, element=d["element"], length=d["length"])
        if kind in COLLECTION_KINDS:
            return cls(label, kind, element=d["element"], bounds=tuple(d.get("bounds", (0, UNBOUNDED))))
        if kind == "optional":
            return cls(label, kind, element=d["element"])
        if kind == "primitive":
            return cls(label, kind)
        raise InvalidTypeDefinition(f"{label}: unknown kind {kind!r}")


def primitive(label: str) -> DataType:
    return DataType(label, "primitive")


def range_of(label: str, base: str, lo=None, hi=None) -> DataType:
    return DataType(label, "range", element=base, bounds=(lo, hi))


def enum_of(label: str, literals: Iterable) -> DataType:
    return DataType(label, "enum", variants=tuple(literals))


def record(label: str, components: Iterable[tuple[str, str]] = ()) -> DataType:
    return DataType(label, "record", components=tuple((n, t) for n, t in components))


def array_of(label: str, element: str, length: int) -> DataType:
    return DataType(label, "array", element=element, length=length)


def collection(label: str, kind: str, element: str, lo: int = 0, hi: int | str = UNBOUNDED) -> DataType:
    if kind == "array":
        raise InvalidTypeDefinition("use array_of for fixed-length arrays")
    return DataType(label, kind, element=element, bounds=(lo, hi))


def optional_of(label: str, element: str) -> DataType:
    return DataType(label, "optional", element=element)


def union_of(label: str, variants: Iterable[str]) -> DataType:
    return DataType(label, "union", variants=tuple(variants))


def builtin_types() -> dict[str, DataType]:
    out = {p: primitive(p) for p in PRIMITIVES}
    out[ANY_TYPE] = union_of(ANY_TYPE, PRIMITIVES)
    out[EMPTY] = record(EMPTY)
    return out


BUILTINS = frozenset(builtin_types())


def _max_ok(hi, lo) -> bool:
    return hi == UNBOUNDED or (isinstance(hi, int) and not isinstance(hi, bool) and hi >= lo)


def _check_definition(t: DataType, types: Mapping[str, DataType]) -> None:
    where = f"type {t.label!r}"
    if t.kind not in KINDS:
        raise InvalidTypeDefinition(f"{where}: unknown kind {t.kind!r}")
    if t.kind == "primitive" and t.label not in PRIMITIVES:
        raise InvalidTypeDefinition(f"{where}: primitive kinds are {', '.join(PRIMITIVES)}")
    if t.kind == "range":
        base = types.get(t.element)
        if base is None:
            raise DanglingReference(f"{where}: unknown base {t.element!r}")
        if base.kind != "primitive" or base.label == "boolean":
            raise InvalidTypeDefinition(f"{where}: ranges need an integer, decimal, text or date base")
        lo, hi = t.bounds
        if lo is not None and hi is not None and _order_key(base.label, lo) > _order_key(base.label, hi):
            raise InvalidTypeDefinition(f"{where}: empty range {lo}..{hi}")
    if t.kind == "enum":
        if not t.variants or len(set(t.variants)) != len(t.variants):
            raise InvalidTypeDefinition(f"{where}: enumeration needs distinct literals")
    if t.kind == "record":
        names = [n for n, _ in t.components]
        if len(set(names)) != len(names):
            raise InvalidTypeDefinition(f"{where}: duplicate component names")
    if t.kind == "array":
        if not isinstance(t.length, int) or t.length < 0:
            raise InvalidTypeDefinition(f"{where}: array length must be a non-negative integer")
    if t.kind in ("list", "set", "bag"):
        lo, hi = t.bounds
        if not isinstance(lo, int) or lo < 0 or not _max_ok(hi, lo):
            raise InvalidTypeDefinition(f"{where}: bad occurrence bounds {lo}..{hi}")
    if t.kind == "union" and not t.variants:
        raise InvalidTypeDefinition(f"{where}: union needs at least one variant")
    for ref in t.references():
        if ref not in types:
            raise DanglingReference(f"{where}: unknown component type {ref!r}")


def _order_key(base: str, v):
    if base == "date":
        return _as_date(v)
    if base == "text" and isinstance(v, str):
        return len(v)
    return v


def _inhabitation_ranks(types: Mapping[str, DataType]) -> dict[str, int]:
    """Least fixpoint: rank r means a finite value of nesting depth <= r exists."""
    ranks: dict[str, int] = {}
    level = 0
    changed = True
    while changed:
        changed = False
        new = {}
        for label, t in types.items():
            if label in ranks:
                continue
            if _inhabited_now(t, ranks, types):
                new[label] = level
        if new:
            ranks.update(new)
            changed = True
            level += 1
    return ranks


def _inhabited_now(t: DataType, ranks: Mapping[str, int], types: Mapping[str, DataType]) -> bool:
    k = t.kind
    if k == "set" and t.bounds[0] >= 2:
        # a set needs that many *distinct* elements, not just one element value
        lo = t.bounds[0]
        return t.element in ranks and len(distinct_values(types, ranks, t.element, lo)) >= lo
    if k in ("primitive", "range", "enum", "optional"):
        return True
    if k == "record":
        return all(c in ranks for _, c in t.components)
    if k == "array":
        return t.length == 0 or t.element in ranks
    if k in ("list", "set", "bag"):
        return t.bounds[0] == 0 or t.element in ranks
    if k == "union":
        return any(v in ranks for v in t.variants)
    return False


_ENUM_DEPTH = 6


def distinct_values(types: Mapping[str, DataType], ranks: Mapping[str, int], label: str, n: int,
                    _depth: int = 0) -> list:
    """Up to ``n`` pairwise distinct values of ``label``, smallest first.

    Fewer than ``n`` come back only when the type has fewer values (or when
    the values would have to nest deeper than a fixed cut-off, which only
    affects recursive types).
    """
    if n <= 0 or label not in ranks or _depth > _ENUM_DEPTH:
        return []
    t = types[label]
    k = t.kind
    deeper = _depth + 1
    if k == "primitive":
        return _primitive_values(t.label, n)
    if k == "range":
        return _range_values(t, n)
    if k == "enum":
        return list(t.variants[:n])
    if k == "optional":
        return [None] + distinct_values(types, ranks, t.element, n - 1, deeper)
    if k == "union":
        out, seen = [], set()
        for v in t.variants:
            for x in distinct_values(types, ranks, v, n, deeper):
                if freeze(x) not in seen and len(out) < n:
                    seen.add(freeze(x))
                    out.append(x)
        return out
    if k == "record":
        names = [name for name, _ in t.components]
        pools = [distinct_values(types, ranks, c, n, deeper) for _, c in t.components]
        if any(not pool for pool in pools):
            return []
        return [dict(zip(names, combo)) for combo in itertools.islice(itertools.product(*pools), n)]
    if k == "array":
        pool = distinct_values(types, ranks, t.element, n, deeper) if t.length else []
        return [list(c) for c in itertools.islice(itertools.product(pool, repeat=t.length), n)]
    lo, hi = t.bounds
    pool = distinct_values(types, ranks, t.element, n + lo, deeper)
    out = []
    size = lo
    while len(out) < n and (hi == UNBOUNDED or size <= hi):
        combos = itertools.combinations(pool, size) if k == "set" else itertools.product(pool, repeat=size)
        before = len(out)
        out.extend(list(c) for c in itertools.islice(combos, n - len(out)))
        if len(out) == before:
            break
        size += 1
    return out


def _primitive_values(kind: str, n: int) -> list:
    if kind == "boolean":
        return [False, True][:n]
    if kind == "integer":
        return list(range(n))
    if kind == "decimal":
        return [float(i) for i in range(n)]
    if kind == "text":
        return [""] + [f"v{i}" for i in range(1, n)]
    epoch = datetime.date(1970, 1, 1)
    return [(epoch + datetime.timedelta(days=i)).isoformat() for i in range(n)]


def _range_values(t: DataType, n: int) -> list:
    lo, hi = t.bounds
    base = t.element
    if base == "integer":
        a = lo if lo is not None else (hi - n + 1 if hi is not None else 0)
        b = hi if hi is not None else a + n - 1
        return list(range(a, min(b, a + n - 1) + 1))
    if base == "decimal":
        a = float(lo) if lo is not None else (float(hi) - n if hi is not None else 0.0)
        if hi is None:
            return [a + i for i in range(n)]
        b = float(hi)
        if n == 1 or a == b:
            return [a]
        step = (b - a) / (n - 1)
        return sorted({min(a + i * step, b) for i in range(n)})
    if base == "text":
        out = []
        size = lo or 0
        while len(out) < n and (hi is None or size <= hi):
            out.extend("".join(c) for c in itertools.islice(itertools.product("ab", repeat=size), n - len(out)))
            size += 1
        return out
    a = _as_date(lo) or datetime.date(2000, 1, 1)
    b = _as_date(hi)
    days = n if b is None else min(n, (b - a).days + 1)
    return [(a + datetime.timedelta(days=i)).isoformat() for i in range(days)]


@dataclass(frozen=True)
class TypeRegistry:
    types: Mapping[str, DataType] = field(default_factory=builtin_types)
    ranks: Mapping[str, int] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.ranks is None:
            object.__setattr__(self, "ranks", _inhabitation_ranks(self.types))

    def __contains__(self, label) -> bool:
        return label in self.types

    def __getitem__(self, label: str) -> DataType:
        try:
            return self.types[label]
        except KeyError:
            raise UnknownType(f"unknown type {label!r}") from None

    def get(self, label: str) -> DataType | None:
        return self.types.get(label)

    def register(self, *new: DataType) -> TypeRegistry:
        """Return a registry holding ``new`` as well; validates the whole batch at once."""
        merged = dict(self.types)
        for t in new:
            old = merged.get(t.label)
            if old is not None and old != t:
                raise DuplicateLabel(f"type {t.label!r} already registered with a different definition")
            merged[t.label] = t
        for t in new:
            _check_definition(t, merged)
        ranks = _inhabitation_ranks(merged)
        empty = sorted(set(merged) - set(ranks))
        if empty:
            raise InfiniteType(f"types without a finite value: {', '.join(empty)}")
        return TypeRegistry(merged, ranks)

    def without(self, labels: Iterable[str]) -> TypeRegistry:
        drop = set(labels) - BUILTINS
        return TypeRegistry({k: v for k, v in self.types.items() if k not in drop})

    def user_types(self) -> list[DataType]:
        return [self.types[k] for k in sorted(self.types) if k not in BUILTINS]

    def to_json(self) -> list[dict]:
        return [t.to_json() for t in self.user_types()]

    @classmethod
    def from_json(cls, items: Iterable[Mapping]) -> TypeRegistry:
        return cls().register(*(DataType.from_json(d) for d in items))

    def reachable(self, label: str) -> set[str]:
        seen: set[str] = set()
        todo = [label]
        while todo:
            cur = todo.pop()
            if cur in seen or cur not in self.types:
                continue
            seen.add(cur)
            todo.extend(self.types[cur].references())
        return seen

    def resolve_optional(self, label: str) -> str:
        """Strip optional wrappers."""
        t = self[label]
        while t.kind == "optional":
            t = self[t.element]
        return t.label


def register_type(registry: TypeRegistry, t: DataType) -> TypeRegistry:
    return registry.register(t)


def register_types(registry: TypeRegistry, types: Iterable[DataType]) -> TypeRegistry:
    return registry.register(*types)


# value checking

def _as_date(v) -> datetime.date | None:
    if isinstance(v, datetime.date):
        return v if not isinstance(v, datetime.datetime) else v.date()
    if isinstance(v, str):
        try:
            return datetime.date.fromisoformat(v)
        except ValueError:
            return None
    return None


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_number(v) -> bool:
    if isinstance(v, bool):
        return False
    if isinstance(v, float):
        return math.isfinite(v)
    return isinstance(v, (int, Decimal))


def _primitive_ok(kind: str, v) -> bool:
    if kind == "integer":
        return _is_int(v)
    if kind == "decimal":
        return _is_number(v)
    if kind == "text":
        return isinstance(v, str)
    if kind == "boolean":
        return isinstance(v, bool)
    if kind == "date":
        return _as_date(v) is not None
    return False


def freeze(v) -> str:
    """Canonical hashable rendering of a value (used for set/unique checks)."""
    return json.dumps(v, sort_keys=True, default=str)


def _fmt_bound(b) -> str:
    return "" if b is None else str(b)


def _check(reg: TypeRegistry, label: str, v, path: str, out: list[Violation]) -> None:
    t = reg[label]
    k = t.kind
    if k == "optional":
        if v is not None:
            _check(reg, t.element, v, path, out)
        return
    if v is None and k != "union":  # a union may have an optional variant
        out.append(Violation("Missing", path, f"value required for type {label}"))
        return
    if k == "primitive":
        if not _primitive_ok(t.label, v):
            out.append(Violation("TypeMismatch", path, f"expected {t.label}, got {type(v).__name__}"))
        return
    if k == "range":
        base = t.element
        if not _primitive_ok(base, v):
            out.append(Violation("TypeMismatch", path, f"expected {base}, got {type(v).__name__}"))
            return
        lo, hi = t.bounds
        key = _order_key(base, v)
        if (lo is not None and key < _order_key(base, lo)) or (hi is not None and key > _order_key(base, hi)):
            what = "length" if base == "text" else "value"
            out.append(Violation("OutOfRange", path,
                                 f"{what} {key} out of range {_fmt_bound(lo)}..{_fmt_bound(hi)}"))
        return
    if k == "enum":
        if not any(v == x and type(v) is type(x) for x in t.variants):
            out.append(Violation("NotInEnum", path, f"{v!r} not one of {list(t.variants)}"))
        return
    if k == "record":
        if not isinstance(v, Mapping):
            out.append(Violation("TypeMismatch", path, f"expected record {label}"))
            return
        names = {n for n, _ in t.components}
        for extra in sorted(set(v) - names):
            out.append(Violation("UnknownComponent", f"{path}.{extra}", f"{label} has no component {extra!r}"))
        for name, ctype in t.components:
            _check(reg, ctype, v.get(name), f"{path}.{name}", out)
        return
    if k in COLLECTION_KINDS:
        if k == "set" and isinstance(v, (set, frozenset)):
            items = sorted(v, key=freeze)
        elif isinstance(v, (list, tuple)):
            items = list(v)
        else:
            out.append(Violation("TypeMismatch", path, f"expected {k} of {t.element}"))
            return
        n = len(items)
        if k == "array":
            if n != t.length:
                out.append(Violation("Length", path, f"length {n} ≠ {t.length}"))
        else:
            lo, hi = t.bounds
            if n < lo or (hi != UNBOUNDED and n > hi):
                out.append(Violation("Cardinality", path, f"{n} elements, allowed {lo}..{hi}"))
        if k == "set":
            frozen = [freeze(x) for x in items]
            if len(set(frozen)) != len(frozen):
                out.append(Violation("DuplicateElement", path, "set elements must be distinct"))
        for i, item in enumerate(items):
            _check(reg, t.element, item, f"{path}[{i}]", out)
        return
    if k == "union":
        for variant in t.variants:
            trial: list[Violation] = []
            _check(reg, variant, v, path, trial)
            if not trial:
                return
        if v is None:
            out.append(Violation("Missing", path, f"value required for type {label}"))
        else:
            out.append(Violation("NoVariant", path, f"value matches no variant of {label}"))


def check_value(registry: TypeRegistry, type_label: str, v) -> Verdict:
    """Check ``v`` against the registered type; violations are ordered by path."""
    registry[type_label]
    out: list[Violation] = []
    _check(registry, type_label, v, "$", out)
    return Verdict(tuple(sorted(set(out), key=lambda x: (x.element, x.rule, x.message))))


# value generation

_WORDS = ("alpha", "bravo", "delta", "echo", "kilo", "lima", "oscar", "sierra")
_MAX_DEPTH = 4


def _primitive_value(kind: str, rng: random.Random | None, salt: int):
    if kind == "integer":
        return salt if rng is None else rng.randint(0, 1000) + salt
    if kind == "decimal":
        return float(salt) if rng is None else round(rng.uniform(0, 1000), 2) + salt
    if kind == "text":
        return f"v{salt}" if rng is None else f"{rng.choice(_WORDS)}{rng.randint(0, 9999)}{salt or ''}"
    if kind == "boolean":
        return bool(salt % 2) if rng is None else rng.random() < 0.5
    if kind == "date":
        base = datetime.date(1970, 1, 1) if rng is None else datetime.date(2000, 1, 1)
        days = salt if rng is None else rng.randint(0, 9000) + salt
        return (base + datetime.timedelta(days=days)).isoformat()
    raise InvalidTypeDefinition(kind)


def _range_value(t: DataType, rng: random.Random | None, salt: int):
    lo, hi = t.bounds
    base = t.element
    if base == "integer":
        a = lo if lo is not None else (hi - 1000 if hi is not None else 0)
        b = hi if hi is not None else a + 1000
        if rng is None:
            return min(a + salt, b)
        return rng.randint(a, b)
    if base == "decimal":
        a = float(lo) if lo is not None else (float(hi) - 1000 if hi is not None else 0.0)
        b = float(hi) if hi is not None else a + 1000
        if rng is None:
            return min(a + salt, b)
        return min(max(round(rng.uniform(a, b), 2), a), b)
    if base == "text":
        a = lo or 0
        b = hi if hi is not None else a + 8
        n = a if rng is None else rng.randint(a, min(b, a + 8))
        letters = "".join(rng.choice("abcdefgh") for _ in range(n)) if rng else "x" * n
        return ((str(salt) if salt else "") + letters)[:n]
    if base == "date":
        a = _as_date(lo) or datetime.date(2000, 1, 1)
        b = _as_date(hi) or a + datetime.timedelta(days=9000)
        span = (b - a).days
        off = min(salt, span) if rng is None else rng.randint(0, span)
        return (a + datetime.timedelta(days=off)).isoformat()
    raise InvalidTypeDefinition(base)


def sample_value(registry: TypeRegistry, label: str, rng: random.Random | None = None,
                 *, salt: int = 0, _depth: int = 0):
    """Produce a value of the given type.

    With ``rng=None`` the result is the deterministic minimal witness; otherwise
    a random value.  Recursion is cut off by falling back to the witness branch
    of lowest inhabitation rank, so generation always terminates.
    """
    return _sample(registry, registry.ranks, label, rng, salt, _depth)


def _sample(reg, ranks, label, rng, salt, depth):
    t = reg[label]
    k = t.kind
    deep = depth >= _MAX_DEPTH
    r = None if deep else rng
    if k == "primitive":
        return _primitive_value(t.label, r, salt)
    if k == "range":
        return _range_value(t, r, salt)
    if k == "enum":
        return t.variants[0] if r is None else r.choice(t.variants)
    if k == "record":
        return {n: _sample(reg, ranks, c, rng, salt, depth + 1) for n, c in t.components}
    if k == "optional":
        if r is None or t.element not in ranks or r.random() < 0.4:
            return None
        return _sample(reg, ranks, t.element, rng, salt, depth + 1)
    if k == "union":
        live = [v for v in t.variants if v in ranks]
        pick = min(live, key=lambda v: ranks[v]) if r is None else r.choice(live)
        return _sample(reg, ranks, pick, rng, salt, depth + 1)
    if k in COLLECTION_KINDS:
        if k == "array":
            n = t.length
        else:
            lo, hi = t.bounds
            if r is None:
                n = lo
            else:
                top = lo + 2 if hi == UNBOUNDED else min(hi, lo + 2)
                n = r.randint(lo, top)
        items = []
        seen = set()
        attempt = 0
        while len(items) < n and attempt < n * 8 + 8:
            item = _sample(reg, ranks, t.element, rng, salt * 31 + attempt, depth + 1)
            attempt += 1
            if k == "set":
                key = freeze(item)
                if key in seen:
                    continue
                seen.add(key)
            items.append(item)
        if len(items) < n:
            # sampling kept colliding (few distinct element values): fill deterministically
            for item in distinct_values(reg.types, ranks, t.element, n + len(items)):
                if len(items) < n and freeze(item) not in seen:
                    seen.add(freeze(item))
                    items.append(item)
        return items
    raise InvalidTypeDefinition(label)


def witness(registry: TypeRegistry, label: str):
    return sample_value(registry, label, None)
