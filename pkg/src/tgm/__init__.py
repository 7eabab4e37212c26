"""Typed property-hypergraph schemas and instances, with supermodel-based schema translation.

The core pieces:

* ``datatypes`` -- the type universe (primitives, ranges, records, collections...).
* ``schema`` / ``instance`` -- typed graph schemas, instances, validation and mutations.
* ``abstraction`` -- folding node-type groups into hyper-nodes and back.
* ``supermodel`` -- the five meta-constructs, ``translate`` and ``translate_inverse``.
* ``frontends`` -- relational DDL, textual ER, an XML Schema subset and RDFS.
"""

from .abstraction import FoldReport, GroupingSpec, fold, unfold
from .datatypes import DataType, TypeRegistry, check_value, register_type
from .errors import TgmError
from .generate import gen_instance
from .instance import (DeleteEdge, DeleteNode, InsertEdge, InsertNode, InstanceEdge, InstanceNode,
                       TypedGraphInstance, UpdateEdge, UpdateNode, apply_mutations, evaluate_constraint,
                       validate_instance)
from .schema import (Constraint, EdgeType, Multiplicity, NodeType, Participation, TypedGraphSchema,
                     most_general_multiplicity, schema_equals, validate_schema)
from .supermodel import (MetaElement, SupermodelSchema, TranslationReport, check_information_preservation,
                         check_semantics_preservation, supermodel_equals, translate, translate_inverse)
from .verdict import Verdict, Violation

__all__ = [
    "Constraint", "DataType", "DeleteEdge", "DeleteNode", "EdgeType", "FoldReport", "GroupingSpec",
    "InsertEdge", "InsertNode", "InstanceEdge", "InstanceNode", "MetaElement", "Multiplicity", "NodeType",
    "Participation", "SupermodelSchema", "TgmError", "TranslationReport", "TypeRegistry",
    "TypedGraphInstance", "TypedGraphSchema", "UpdateEdge", "UpdateNode", "Verdict", "Violation",
    "apply_mutations", "check_information_preservation", "check_semantics_preservation", "check_value",
    "evaluate_constraint", "fold", "gen_instance", "most_general_multiplicity", "register_type",
    "schema_equals", "supermodel_equals", "translate", "translate_inverse", "unfold", "validate_instance",
    "validate_schema",
]
