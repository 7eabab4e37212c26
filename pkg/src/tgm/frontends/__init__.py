"""Source-model frontends: parse a concrete schema format and lift it to the supermodel."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import er, rdfs, relational, xsd


@dataclass(frozen=True)
class Frontend:
    name: str
    load: Callable  # path -> parsed source schema
    lift: Callable  # parsed schema (+ options) -> SupermodelSchema
    lower: Callable  # SupermodelSchema -> parsed schema, for structural round trips
    has_instances: bool = False


FRONTENDS: dict[str, Frontend] = {
    "relational": Frontend("relational", relational.load_relational, relational.lift_relational,
                           relational.lower_relational, has_instances=True),
    "er": Frontend("er", er.load_er, er.lift_er, er.lower_er),
    "xsd": Frontend("xsd", xsd.load_xsd, xsd.lift_xsd, xsd.lower_xsd),
    "rdfs": Frontend("rdfs", rdfs.load_rdfs, rdfs.lift_rdfs, rdfs.lower_rdfs, has_instances=True),
}


def lift_file(source_model: str, path, **options):
    """Parse ``path`` with the named frontend and lift it; returns (parsed, supermodel)."""
    fe = FRONTENDS[source_model]
    parsed = fe.load(path)
    return parsed, fe.lift(parsed, **options)


__all__ = ["FRONTENDS", "Frontend", "lift_file", "er", "rdfs", "relational", "xsd"]
