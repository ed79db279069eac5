"""Shared value types: certificates, verdicts, subgroup handles, budgets and errors."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any


class TdlcError(Exception):
    """Base class for every error raised by the workbench."""

    code = "error"

    def __init__(self, message: str = "", **info):
        super().__init__(message or self.code)
        self.info = info


def _error(name: str, code: str):
    return type(name, (TdlcError,), {"code": code})


UnsupportedFamily = _error("UnsupportedFamily", "unsupported-family")
ModelMismatch = _error("ModelMismatch", "model-mismatch")
NotRepresentable = _error("NotRepresentable", "not-representable")
NotNested = _error("NotNested", "not-nested")
InfiniteIndex = _error("InfiniteIndex", "infinite-index")
UnsupportedQuotient = _error("UnsupportedQuotient", "unsupported-quotient")
NotNormal = _error("NotNormal", "not-normal")
EnumerationTooLarge = _error("EnumerationTooLarge", "enumeration-too-large")
MethodDisagreement = _error("MethodDisagreement", "method-disagreement")
CrossCheckFailure = _error("CrossCheckFailure", "cross-check-failure")
PrerequisiteUncertified = _error("PrerequisiteUncertified", "prerequisite-uncertified")
PrerequisiteMissing = _error("PrerequisiteMissing", "prerequisite-missing")
SampleEscape = _error("SampleEscape", "sample-escape")
EigenfactorsMissing = _error("EigenfactorsMissing", "eigenfactors-missing")
DecompositionFailure = _error("DecompositionFailure", "decomposition-failure")
DecompositionNotFound = _error("DecompositionNotFound", "decomposition-not-found")
CoreIsOpen = _error("CoreIsOpen", "core-is-open")
NotCommensurated = _error("NotCommensurated", "not-commensurated")
OracleTooLarge = _error("OracleTooLarge", "oracle-too-large")
ParseError = _error("ParseError", "parse-error")


class InvalidParameter(TdlcError):
    code = "invalid-parameter"

    def __init__(self, field_name: str, message: str = ""):
        super().__init__(f"{field_name}: {message}" if message else field_name, field=field_name)
        self.field = field_name


class BudgetExhausted(TdlcError):
    code = "budget-exhausted"

    def __init__(self, message: str = "", partial: Any = None):
        super().__init__(message or "budget exhausted")
        self.partial = partial


class Budget:
    """A step counter shared by one query.

    Every expensive inner loop calls spend(); once the bound is crossed the
    query raises BudgetExhausted.
    """

    def __init__(self, steps: int = 10**6):
        self.limit = steps
        self.used = 0

    def spend(self, n: int = 1):
        self.used += n
        if self.used > self.limit:
            raise BudgetExhausted(f"step bound {self.limit} exceeded")

    @property
    def remaining(self):
        return self.limit - self.used


def as_budget(budget) -> Budget:
    if budget is None:
        return Budget()
    if isinstance(budget, Budget):
        return budget
    return Budget(int(budget))


class Grade(enum.IntEnum):
    BOUNDED = 0
    STABILIZED = 1
    EXACT = 2


@dataclass(frozen=True)
class Certificate:
    grade: Grade
    level: int | None = None
    evidence: dict = field(default_factory=dict, compare=False, hash=False)

    @classmethod
    def exact(cls, **evidence):
        return cls(Grade.EXACT, None, evidence)

    @classmethod
    def stabilized(cls, k, **evidence):
        return cls(Grade.STABILIZED, k, evidence)

    @classmethod
    def bounded(cls, k, **evidence):
        return cls(Grade.BOUNDED, k, evidence)

    def __le__(self, other):
        return (self.grade, -(self.level or 0)) <= (other.grade, -(other.level or 0))

    @property
    def label(self):
        if self.grade == Grade.EXACT:
            return "Exact"
        name = "Stabilized" if self.grade == Grade.STABILIZED else "Bounded"
        return f"{name}({self.level})"

    def __str__(self):
        return self.label


def weakest(*certs: Certificate) -> Certificate:
    """The lowest grade among certs (the grade of a combined result)."""
    certs = [c for c in certs if c is not None]
    if not certs:
        return Certificate.exact()
    low = min(c.grade for c in certs)
    levels = [c.level for c in certs if c.grade == low and c.level is not None]
    ev = {}
    for c in certs:
        ev.update(c.evidence)
    return Certificate(low, min(levels) if levels else None, ev)


class Outcome(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    certificate: Certificate | None = None
    witness: Any = None
    level: int | None = None
    note: str = ""

    @classmethod
    def true(cls, certificate=None, witness=None, note=""):
        return cls(Outcome.TRUE, certificate or Certificate.exact(), witness, None, note)

    @classmethod
    def false(cls, witness, certificate=None, note=""):
        if witness is None:
            raise ValueError("a False verdict needs a witness")
        return cls(Outcome.FALSE, certificate or Certificate.exact(), witness, None, note)

    @classmethod
    def unknown(cls, k, note=""):
        return cls(Outcome.UNKNOWN, Certificate.bounded(k), None, k, note)

    @property
    def is_true(self):
        return self.outcome is Outcome.TRUE

    @property
    def is_false(self):
        return self.outcome is Outcome.FALSE

    @property
    def is_unknown(self):
        return self.outcome is Outcome.UNKNOWN

    def __str__(self):
        if self.is_unknown:
            return f"Unknown({self.level})"
        return f"{self.outcome.value.capitalize()}[{self.certificate}]"


@dataclass(frozen=True)
class SubgroupHandle:
    """Two-sided bracket around a closed subgroup.

    inner generates (up to closure at resolution k) a subgroup known to lie
    inside the target; outer is a descriptor known to contain it.  exact
    means the two are certified to agree; closed records whether the target
    is known to be closed as a set (contraction groups need not be).
    """

    inner: tuple
    k: int
    outer: Any
    exact: bool
    certificate: Certificate
    closed: bool | None = True

    def with_k(self, k):
        return SubgroupHandle(self.inner, k, self.outer, self.exact, self.certificate, self.closed)
