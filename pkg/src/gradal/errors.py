"""Stable diagnostic codes and the checker error type.

Every failure raised by the library carries exactly one :class:`Code`, so
front ends can pattern-match on failures without parsing messages.  The codes
are total over both checkers, the reducer, the config loaders and the
generators; nothing raises a bare ``ValueError`` for a user-facing condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping


class Code(Enum):
    """Stable diagnostic codes."""

    # algebra / configuration
    SEMIRING_MISMATCH = "SemiringMismatch"
    UNKNOWN_ELEMENT = "UnknownElement"
    LENGTH_MISMATCH = "LengthMismatch"
    NO_MORPHISM = "NoMorphism"
    UNKNOWN_MODE = "UnknownMode"
    MODE_VIOLATION = "ModeViolation"
    WEAKENING_FORBIDDEN = "WeakeningForbidden"
    # contexts
    DUPLICATE_NAME = "DuplicateName"
    TYPE_NOT_WF = "TypeNotWF"
    LINEAR_TYPE_NOT_WF = "LinearTypeNotWF"
    NOT_A_TYPE = "NotAType"
    LINEAR_VAR_IN_TYPE = "LinearVarInType"
    # terms
    UNBOUND_VAR = "UnboundVar"
    TYPE_MISMATCH = "TypeMismatch"
    GRADE_MISMATCH = "GradeMismatch"
    ANNOTATION_MISSING = "AnnotationMissing"
    CONVERSION_INCONCLUSIVE = "ConversionInconclusive"
    SUBUSAGE_FAILED = "SubusageFailed"
    LINEAR_VAR_UNUSED = "LinearVarUnused"
    LINEAR_VAR_REUSED = "LinearVarReused"
    NON_EMPTY_LINEAR_ZONE = "NonEmptyLinearZone"
    GRADE_MODE_MISMATCH = "GradeModeMismatch"
    # metatheory
    SHAPE_MISMATCH = "ShapeMismatch"
    GENERATION_EXHAUSTED = "GenerationExhausted"
    # frontend
    PARSE_ERROR = "ParseError"
    UNBOUND_NAME = "UnboundName"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass
class CheckError(Exception):
    """A checker/loader failure with a stable code and structured payload.

    ``rule`` names the typing rule in whose schema the failure arose, when
    one applies.  ``payload`` carries machine-readable details (offending
    vectors, expected/actual types, ...) used by diagnostics rendering and by
    tests.
    """

    code: Code
    message: str
    rule: str | None = None
    payload: Mapping[str, Any] = field(default_factory=dict)

    def __str__(self) -> str:
        rule = f" [{self.rule}]" if self.rule else ""
        return f"{self.code.value}{rule}: {self.message}"
