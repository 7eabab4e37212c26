"""Validation verdicts: an ok flag plus an ordered list of violations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable


@dataclass(frozen=True, order=True)
class Violation:
    rule: str
    element: str
    message: str = ""

    def prefixed(self, prefix: str) -> Violation:
        return Violation(self.rule, f"{prefix}{self.element}", self.message)

    def to_dict(self) -> dict:
        return {"rule": self.rule, "element": self.element, "message": self.message}


@dataclass(frozen=True)
class Verdict:
    violations: tuple[Violation, ...] = ()
    warnings: tuple[Violation, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    @classmethod
    def of(cls, violations: Iterable[Violation] = (), warnings: Iterable[Violation] = ()) -> Verdict:
        """Build a verdict with violations sorted by (rule, element, message)."""
        return cls(tuple(sorted(set(violations))), tuple(sorted(set(warnings))))

    def merge(self, other: Verdict) -> Verdict:
        return Verdict.of(self.violations + other.violations, self.warnings + other.warnings)

    def rules(self) -> list[str]:
        return [v.rule for v in self.violations]

    def to_dict(self) -> dict:
        out = {"ok": self.ok, "violations": [v.to_dict() for v in self.violations]}
        if self.warnings:
            out["warnings"] = [w.to_dict() for w in self.warnings]
        return out
