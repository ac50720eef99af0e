"""gradal: graded dependent type theories over pluggable semirings and modes."""

from __future__ import annotations

from .errors import CheckError, Code
from .semiring import (
    GradeValue,
    GradeVector,
    LawViolation,
    SemiringMorphism,
    SemiringSpec,
    validate_morphism,
    validate_semiring,
)
from .modes import Mode, ModeTheory, validate_mode_theory
from .syntax import (
    GladContext,
    GradedContext,
    LinearContext,
    Term,
    Zone,
    alpha_eq,
)
from .reduction import ConvResult, ReductionTrace, conv_equiv, normalize, step
from .dmgl import (
    CheckerConfig,
    Derivation,
    GradeSynthesis,
    check_graded,
    check_graded_ctx,
    check_mixed,
    check_mixed_ctx,
    infer_graded,
    infer_mixed,
    type_wf_graded,
    type_wf_linear,
)
from .glad import (
    GladCheckerConfig,
    check_glad,
    check_glad_ctx,
    infer_glad,
    type_wf_glad,
)
from .configs import (
    SHIPPED_MODE_THEORY_IDS,
    SHIPPED_SEMIRING_IDS,
    load_config,
    parse_mode_config,
    parse_semiring_config,
    shipped_mode_theories,
    shipped_semirings,
)
from .frontend import (
    Diagnostic,
    SourceModule,
    Span,
    check_module,
    parse_module,
    print_term,
    reduce_module,
    render_derivation,
    render_error,
    render_judgment,
    render_trace,
)

__all__ = [
    "CheckError",
    "Code",
    "GradeValue",
    "GradeVector",
    "LawViolation",
    "SemiringMorphism",
    "SemiringSpec",
    "validate_morphism",
    "validate_semiring",
    "Mode",
    "ModeTheory",
    "validate_mode_theory",
    "GladContext",
    "GradedContext",
    "LinearContext",
    "Term",
    "Zone",
    "alpha_eq",
    "ConvResult",
    "ReductionTrace",
    "conv_equiv",
    "normalize",
    "step",
    "CheckerConfig",
    "Derivation",
    "GradeSynthesis",
    "check_graded",
    "check_graded_ctx",
    "check_mixed",
    "check_mixed_ctx",
    "infer_graded",
    "infer_mixed",
    "type_wf_graded",
    "type_wf_linear",
    "GladCheckerConfig",
    "check_glad",
    "check_glad_ctx",
    "infer_glad",
    "type_wf_glad",
    "SHIPPED_MODE_THEORY_IDS",
    "SHIPPED_SEMIRING_IDS",
    "load_config",
    "parse_mode_config",
    "parse_semiring_config",
    "shipped_mode_theories",
    "shipped_semirings",
    "Diagnostic",
    "SourceModule",
    "Span",
    "check_module",
    "parse_module",
    "print_term",
    "reduce_module",
    "render_derivation",
    "render_error",
    "render_judgment",
    "render_trace",
]

__version__ = "0.1.0"
