"""Full beta reduction, reduction traces, and convertibility.

The one-step relation has six graded rules (``gRED-unitBeta``,
``gRED-pairBeta``, ``gRED-coproductBetaLeft/Right``, ``gRED-lambda``,
``gRED-appL``) and six mixed rules (``mRED-unitBeta``, ``mRED-tensorBeta``,
``mRED-ladjBeta``, ``mRED-radjBeta``, ``mRED-lambda``, ``mRED-appL``): beta
steps at the root plus congruence down the left of applications.  The shared
many-mode constructors (lambda/application, pair/eliminator, unit/eliminator,
injections/case) reduce by the graded rules under the same names.

:func:`step` applies the relation at the leftmost-outermost position that
admits a step; convertibility is the congruence closure, decided by
normalizing both sides under a fuel bound.  Fuel exhaustion is data
(``exhausted``/``INCONCLUSIVE``), never an equality verdict.  Reduction never
recomputes grade or mode annotations: surviving subterms are moved verbatim.

Ascriptions have no dynamic content: rule matching looks through them at
consumed positions, and :func:`normalize`/:func:`conv_equiv` erase them up
front.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from enum import Enum

from .syntax import (
    App,
    AppG,
    AppLin,
    Ascribe,
    Case,
    CaseG,
    FElim,
    FPair,
    GInv,
    GWrap,
    Inl,
    InlG,
    Inr,
    InrG,
    Lam,
    LamG,
    LamLin,
    Pair,
    PairElim,
    PairG,
    PairGElim,
    StarElim,
    StarM,
    TensorElim,
    TensorPair,
    Term,
    UnitI,
    UnitIElim,
    UnitJ,
    UnitJElim,
    Zone,
    children_spec,
    erase_ascriptions,
    shift_term,
    subst_term,
)

DEFAULT_FUEL = 10000
FUEL_ENV_VAR = "GRADAL_FUEL"


def default_fuel() -> int:
    """The normalization budget: ``GRADAL_FUEL`` if set, else 10000."""
    raw = os.environ.get(FUEL_ENV_VAR)
    if raw is None:
        return DEFAULT_FUEL
    try:
        return max(0, int(raw))
    except ValueError:
        return DEFAULT_FUEL


class ConvResult(Enum):
    EQUAL = "equal"
    UNEQUAL = "unequal"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class TraceStep:
    rule: str
    position: str
    before: Term
    after: Term


@dataclass(frozen=True)
class ReductionTrace:
    steps: tuple[TraceStep, ...]
    final: Term
    exhausted: bool


def _peel(t: Term) -> Term:
    """Look through ascriptions at a consumed position."""
    while isinstance(t, Ascribe):
        t = t.subject
    return t


def _bind2(outer: Term, inner: Term, body: Term, zone: Zone) -> Term:
    """Substitute a two-binder body: ``outer`` for the older slot, ``inner``
    for the newer (index 0) slot."""
    if zone is Zone.GRADED:
        step1 = subst_term(shift_term(inner, g_by=1), 0, body, Zone.GRADED)
    else:
        step1 = subst_term(shift_term(inner, l_by=1), 0, body, Zone.LINEAR)
    return subst_term(outer, 0, step1, zone)


def root_step(t: Term) -> tuple[Term, str] | None:
    """One step of the one-step relation at the root: a beta rule, or the
    left-application congruence rules."""
    # graded fragment (and the shared many-mode constructors)
    if isinstance(t, UnitJElim) and isinstance(_peel(t.subject_scrut), UnitJ):
        return t.body, "gRED-unitBeta"
    if isinstance(t, StarElim) and isinstance(_peel(t.subject_scrut), StarM):
        return t.body, "gRED-unitBeta"
    if isinstance(t, PairElim):
        scrut = _peel(t.subject_scrut)
        if isinstance(scrut, Pair):
            return _bind2(scrut.left, scrut.right, t.body, Zone.GRADED), "gRED-pairBeta"
    if isinstance(t, PairGElim):
        scrut = _peel(t.subject_scrut)
        if isinstance(scrut, PairG):
            return _bind2(scrut.left, scrut.right, t.body, Zone.GRADED), "gRED-pairBeta"
    if isinstance(t, Case):
        scrut = _peel(t.subject_scrut)
        if isinstance(scrut, Inl):
            return App(t.left, scrut.body), "gRED-coproductBetaLeft"
        if isinstance(scrut, Inr):
            return App(t.right, scrut.body), "gRED-coproductBetaRight"
    if isinstance(t, CaseG):
        scrut = _peel(t.subject_scrut)
        if isinstance(scrut, InlG):
            return AppG(t.left, scrut.body), "gRED-coproductBetaLeft"
        if isinstance(scrut, InrG):
            return AppG(t.right, scrut.body), "gRED-coproductBetaRight"
    if isinstance(t, App):
        fn = _peel(t.fn)
        if isinstance(fn, Lam):
            return subst_term(t.arg, 0, fn.body, Zone.GRADED), "gRED-lambda"
        inner = root_step(t.fn)
        if inner is not None:
            return App(inner[0], t.arg), "gRED-appL"
    if isinstance(t, AppG):
        fn = _peel(t.fn)
        if isinstance(fn, LamG):
            return subst_term(t.arg, 0, fn.body, Zone.GRADED), "gRED-lambda"
        inner = root_step(t.fn)
        if inner is not None:
            return AppG(inner[0], t.arg), "gRED-appL"
    # mixed fragment
    if isinstance(t, UnitIElim) and isinstance(_peel(t.subject_scrut), UnitI):
        return t.body, "mRED-unitBeta"
    if isinstance(t, TensorElim):
        scrut = _peel(t.subject_scrut)
        if isinstance(scrut, TensorPair):
            return _bind2(scrut.left, scrut.right, t.body, Zone.LINEAR), "mRED-tensorBeta"
    if isinstance(t, FElim):
        scrut = _peel(t.subject_scrut)
        if isinstance(scrut, FPair):
            step1 = subst_term(scrut.linear_part, 0, t.body, Zone.LINEAR)
            return subst_term(scrut.graded_part, 0, step1, Zone.GRADED), "mRED-ladjBeta"
    if isinstance(t, GInv):
        body = _peel(t.body)
        if isinstance(body, GWrap):
            return body.body, "mRED-radjBeta"
    if isinstance(t, AppLin):
        fn = _peel(t.fn)
        if isinstance(fn, LamLin):
            return subst_term(t.arg, 0, fn.body, Zone.LINEAR), "mRED-lambda"
        inner = root_step(t.fn)
        if inner is not None:
            return AppLin(inner[0], t.arg), "mRED-appL"
    return None


def _find_step(t: Term, path: tuple[str, ...]) -> tuple[tuple[str, ...], Term, str] | None:
    hit = root_step(t)
    if hit is not None:
        return path, hit[0], hit[1]
    for name, _, _ in children_spec(t):
        found = _find_step(getattr(t, name), path + (name,))
        if found is not None:
            return found
    return None


def _replace_at(t: Term, path: tuple[str, ...], new: Term) -> Term:
    if not path:
        return new
    from dataclasses import replace as _dc_replace

    child = getattr(t, path[0])
    return _dc_replace(t, **{path[0]: _replace_at(child, path[1:], new)})


def format_position(path: tuple[str, ...]) -> str:
    return "." + ".".join(path) if path else "."


def step(t: Term) -> tuple[Term, str, str] | None:
    """One leftmost-outermost step: ``(reduct, rule name, position)``, or
    ``None`` when no position admits a step."""
    found = _find_step(t, ())
    if found is None:
        return None
    path, new, rule = found
    return _replace_at(t, path, new), rule, format_position(path)


def normalize(t: Term, fuel: int | None = None) -> ReductionTrace:
    """Reduce to normal form under a fuel bound; exhaustion is data."""
    if fuel is None:
        fuel = default_fuel()
    cur = erase_ascriptions(t)
    steps: list[TraceStep] = []
    for _ in range(fuel):
        hit = step(cur)
        if hit is None:
            return ReductionTrace(tuple(steps), cur, False)
        new, rule, pos = hit
        steps.append(TraceStep(rule, pos, cur, new))
        cur = new
    exhausted = step(cur) is not None
    return ReductionTrace(tuple(steps), cur, exhausted)


def whnf(t: Term, fuel: int | None = None) -> tuple[Term, bool]:
    """Iterate the root-level relation only (weak-head form for matching
    type constructors); returns ``(term, exhausted)``."""
    if fuel is None:
        fuel = default_fuel()
    cur = t
    while isinstance(cur, Ascribe):
        cur = cur.subject
    for _ in range(fuel):
        hit = root_step(cur)
        if hit is None:
            return cur, False
        cur = hit[0]
        while isinstance(cur, Ascribe):
            cur = cur.subject
    return cur, root_step(cur) is not None


def conv_equiv(t1: Term, t2: Term, fuel: int | None = None) -> ConvResult:
    """Decide convertibility (the congruence closure of the one-step
    relation) by normalization; three-valued."""
    if fuel is None:
        fuel = default_fuel()
    n1 = normalize(t1, fuel)
    n2 = normalize(t2, fuel)
    if n1.final == n2.final:
        return ConvResult.EQUAL
    if n1.exhausted or n2.exhausted:
        return ConvResult.INCONCLUSIVE
    return ConvResult.UNEQUAL
