"""
Groupoid-dim 예외 모듈

Every failure raised by the library derives from GroupoidDimError and
carries the CLI exit code it maps to.
"""

from typing import Any, Optional


class GroupoidDimError(Exception):
    """Base class; exit code 1 unless a subclass says otherwise."""

    exit_code = 1
    kind = "error"

    def __init__(self, message: str, witness: Optional[Any] = None, **details):
        super().__init__(message)
        self.message = message
        self.witness = witness
        self.details = details

    def to_dict(self) -> dict:
        payload = {"error": self.kind, "message": self.message}
        if self.witness is not None:
            payload["witness"] = str(self.witness)
        if self.details:
            payload["details"] = {k: str(v) for k, v in self.details.items()}
        return payload


# --- precondition family (exit 1) ---

class PreconditionError(GroupoidDimError):
    kind = "precondition-violated"


class GraphFormatError(PreconditionError):
    """Graph file could not be parsed; `location` is line:col or a field path."""

    kind = "parse-error"

    def __init__(self, message: str, location: str = "", **details):
        text = f"{location}: {message}" if location else message
        super().__init__(text, **details)
        self.location = location


class DuplicateIdError(GraphFormatError):
    kind = "duplicate-id"


class DanglingEndpointError(GraphFormatError):
    kind = "dangling-endpoint"


class NotAReturnPathError(PreconditionError):
    kind = "not-a-return-path"


class GraphMismatchError(PreconditionError):
    kind = "graph-mismatch"


class InvalidPathError(PreconditionError):
    kind = "invalid-path"


class NonComposableError(PreconditionError):
    kind = "non-composable"


class NotShiftEquivalentError(PreconditionError):
    kind = "not-shift-equivalent"


class DepthExceededError(PreconditionError):
    kind = "depth-exceeded"


class InvalidGroupError(PreconditionError):
    kind = "invalid-group"


class InvalidActionError(PreconditionError):
    kind = "invalid-action"


class InvalidCocycleError(PreconditionError):
    kind = "invalid-cocycle"


class NotABisectionError(PreconditionError):
    kind = "not-a-bisection"


class NotAUnitError(PreconditionError):
    kind = "not-a-unit"


class MissingInputError(PreconditionError):
    kind = "missing-input"


class NegativeInputError(PreconditionError):
    kind = "negative-input"


class UnsupportedGraphError(PreconditionError):
    kind = "unsupported"


# --- inconclusive / numeric (exit 1) ---

class CapExceededError(GroupoidDimError):
    """A search or closure grew past its cap; inconclusive, never a negative proof."""

    kind = "cap-exceeded"

    def __init__(self, message: str, cap: int, **details):
        super().__init__(message, cap=cap, **details)
        self.cap = cap


class NumericalDegeneracyError(GroupoidDimError):
    kind = "numerical-degeneracy"


# --- verification failures (exit 2) ---

class VerificationError(GroupoidDimError):
    exit_code = 2
    kind = "verification-failed"


class BoundViolatedError(VerificationError):
    kind = "bound-violated"
