"""Exception hierarchy shared by all tgm modules."""

from __future__ import annotations


class TgmError(Exception):
    """Base class for every error raised by tgm."""


# type system

class TypeSystemError(TgmError):
    pass


class DuplicateLabel(TypeSystemError):
    pass


class DanglingReference(TypeSystemError):
    pass


class InfiniteType(TypeSystemError):
    pass


class InvalidTypeDefinition(TypeSystemError):
    pass


class UnknownType(TypeSystemError):
    pass


# schema / multiplicity

class EmptyInput(TgmError, ValueError):
    pass


class InvalidSchema(TgmError):
    def __init__(self, verdict):
        self.verdict = verdict
        super().__init__("schema is not valid: " + "; ".join(
            f"{v.rule}({v.element})" for v in verdict.violations))


class ConstraintSyntaxError(TgmError):
    pass


class EvaluationError(TgmError):
    pass


# instances

class UnsatisfiableSchema(TgmError):
    pass


# abstraction

class FoldError(TgmError):
    pass


class OverlappingGroups(FoldError):
    pass


class DanglingLabel(FoldError):
    pass


class NotAHyperNode(FoldError):
    pass


# supermodel

class SupermodelError(TgmError):
    pass


class MalformedSupermodel(SupermodelError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class CyclicDependency(SupermodelError):
    pass


class UnknownKind(SupermodelError):
    pass


class NotInImage(SupermodelError):
    """A typed graph schema element has no pre-image under the translation."""


class MapperUnavailable(SupermodelError):
    pass


# frontends

class FrontendError(TgmError):
    pass


class SchemaSyntaxError(FrontendError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


class UnsupportedFeature(FrontendError):
    pass


class AmbiguousJoinTable(FrontendError):
    pass


class UnresolvableBnode(FrontendError):
    pass


class SourceIntegrityViolation(FrontendError):
    def __init__(self, message, locus=None):
        self.locus = locus
        super().__init__(message if locus is None else f"{message} at {locus}")
