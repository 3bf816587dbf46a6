"""Exception hierarchy shared by the engine modules."""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class MetamodelFormatError(EngineError):
    """A metamodel document could not be parsed or violates a type invariant."""


class ModelFormatError(EngineError):
    """A model document could not be parsed or cannot be interpreted."""


class ResolveError(EngineError):
    """A fully qualified name did not resolve to a metamodel element."""

    def __init__(self, fq_name: str, segment: str):
        super().__init__(f"cannot resolve {fq_name!r}: unknown segment {segment!r}")
        self.fq_name = fq_name
        self.segment = segment


class ModelEditError(EngineError):
    """A model mutation was rejected (unknown id, type mismatch, cycle, ...)."""


class HistoryError(EngineError):
    """A history operation was rejected (empty release, unknown op, bad binding)."""


class ConstraintViolation(EngineError):
    """One or more applicability constraints of a catalog operation failed."""

    def __init__(self, messages: list[str]):
        super().__init__("; ".join(messages))
        self.messages = list(messages)


class MigrationError(EngineError):
    """A custom migration could not complete; the transaction rolls back."""


class TransactionError(EngineError):
    """A coupled operation failed its boundary conformance check."""

    def __init__(self, phase: str, violations=(), cause: Exception | None = None):
        self.phase = phase
        self.violations = list(violations)
        self.cause = cause
        if cause is not None:
            detail = f"{type(cause).__name__}: {cause}"
        else:
            detail = "; ".join(v.message for v in self.violations)
        super().__init__(f"transaction failed at {phase}: {detail}")
