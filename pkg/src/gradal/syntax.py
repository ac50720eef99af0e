"""Unified term syntax, contexts, and judgment forms.

Types are terms (there are ``Type`` and ``Linear`` universes), so a single
AST covers subjects, types, and contexts for all three judgment families.
Binding is de Bruijn, with *two independent zones*: graded variables
(:class:`Var`) and linear variables (:class:`LVar`) are numbered separately,
so mixed-fragment terms index the graded zone and the linear zone without
interference.  The many-mode fragment uses the graded zone only.

Binder constructors carry surface-name hints for printing; the hints are
excluded from equality, so dataclass equality *is* alpha-equivalence.  Grade
and mode annotations participate in equality: alpha-equivalence is
annotation-sensitive.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Callable, Iterator

from .semiring import GradeValue, GradeVector


class Zone(Enum):
    GRADED = "graded"
    LINEAR = "linear"


@dataclass(frozen=True)
class Term:
    """Base class of every syntax node."""


# ---------------------------------------------------------------------------
# shared


@dataclass(frozen=True)
class Var(Term):
    """Graded-zone variable (0 = innermost binding)."""

    ix: int


@dataclass(frozen=True)
class LVar(Term):
    """Linear-zone variable (0 = innermost binding)."""

    ix: int


@dataclass(frozen=True)
class TypeU(Term):
    """The universe of graded types."""


@dataclass(frozen=True)
class LinearU(Term):
    """The universe of linear types."""


@dataclass(frozen=True)
class Ascribe(Term):
    """Checking-time type ascription ``(t : X)``; no dynamic content."""

    subject: Term
    type_: Term


# ---------------------------------------------------------------------------
# graded fragment


@dataclass(frozen=True)
class UnitJType(Term):
    """The graded unit type."""


@dataclass(frozen=True)
class UnitJ(Term):
    """The graded unit inhabitant."""


@dataclass(frozen=True)
class UnitJElim(Term):
    subject_scrut: Term
    body: Term


@dataclass(frozen=True)
class Pair(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class PairElim(Term):
    name1: str = field(compare=False)
    name2: str = field(compare=False)
    subject_scrut: Term = None  # type: ignore[assignment]
    body: Term = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Inl(Term):
    body: Term


@dataclass(frozen=True)
class Inr(Term):
    body: Term


@dataclass(frozen=True)
class Case(Term):
    q: GradeValue
    subject_scrut: Term
    left: Term
    right: Term


@dataclass(frozen=True)
class Lam(Term):
    name: str = field(compare=False)
    body: Term = None  # type: ignore[assignment]


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class GWrap(Term):
    """Right-adjoint introduction: wraps a mixed term (empty linear zone)."""

    body: Term


@dataclass(frozen=True)
class GradedArrow(Term):
    """Graded dependent function type ``(x :^r X) -> Y``."""

    r: GradeValue
    name: str = field(compare=False)
    domain: Term = None  # type: ignore[assignment]
    codomain: Term = None  # type: ignore[assignment]


@dataclass(frozen=True)
class BoxTimes(Term):
    """Graded dependent pair type ``(x :^r X) >< Y``."""

    r: GradeValue
    name: str = field(compare=False)
    left: Term = None  # type: ignore[assignment]
    right: Term = None  # type: ignore[assignment]


@dataclass(frozen=True)
class BoxPlus(Term):
    """Graded coproduct type ``X (+) Y``."""

    left: Term
    right: Term


@dataclass(frozen=True)
class GAdj(Term):
    """Right-adjoint type former ``G A`` (A a linear type)."""

    body: Term


# ---------------------------------------------------------------------------
# mixed fragment


@dataclass(frozen=True)
class ILin(Term):
    """The linear unit type."""


@dataclass(frozen=True)
class UnitI(Term):
    """The linear unit inhabitant."""


@dataclass(frozen=True)
class UnitIElim(Term):
    subject_scrut: Term
    body: Term


@dataclass(frozen=True)
class LamLin(Term):
    name: str = field(compare=False)
    body: Term = None  # type: ignore[assignment]


@dataclass(frozen=True)
class AppLin(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class TensorPair(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class TensorElim(Term):
    name1: str = field(compare=False)
    name2: str = field(compare=False)
    subject_scrut: Term = None  # type: ignore[assignment]
    body: Term = None  # type: ignore[assignment]


@dataclass(frozen=True)
class FPair(Term):
    """Left-adjoint introduction ``F(t, l)`` (graded part, linear part)."""

    graded_part: Term
    linear_part: Term


@dataclass(frozen=True)
class FElim(Term):
    """``let F(x, y) = l in l'`` — binds one graded and one linear variable."""

    gname: str = field(compare=False)
    lname: str = field(compare=False)
    subject_scrut: Term = None  # type: ignore[assignment]
    body: Term = None  # type: ignore[assignment]


@dataclass(frozen=True)
class GInv(Term):
    """Right-adjoint elimination ``Ginv t`` (t a graded term; empty zone)."""

    body: Term


@dataclass(frozen=True)
class Lollipop(Term):
    """Linear function type ``A -o B`` (non-dependent)."""

    domain: Term
    codomain: Term


@dataclass(frozen=True)
class Tensor(Term):
    """Linear pair type ``A (x) B`` (non-dependent)."""

    left: Term
    right: Term


@dataclass(frozen=True)
class FAdj(Term):
    """Left-adjoint type former ``F(x :^r X). A`` — binds a graded variable."""

    r: GradeValue
    name: str = field(compare=False)
    domain: Term = None  # type: ignore[assignment]
    body: Term = None  # type: ignore[assignment]


# ---------------------------------------------------------------------------
# many-mode fragment


@dataclass(frozen=True)
class UnitIM(Term):
    """Mode-indexed unit type ``I@m``."""

    mode: str


@dataclass(frozen=True)
class StarM(Term):
    """Mode-indexed unit inhabitant ``*@m``."""

    mode: str


@dataclass(frozen=True)
class StarElim(Term):
    subject_scrut: Term
    body: Term


@dataclass(frozen=True)
class LamG(Term):
    name: str = field(compare=False)
    body: Term = None  # type: ignore[assignment]


@dataclass(frozen=True)
class AppG(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class PairG(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class PairGElim(Term):
    name1: str = field(compare=False)
    name2: str = field(compare=False)
    subject_scrut: Term = None  # type: ignore[assignment]
    body: Term = None  # type: ignore[assignment]


@dataclass(frozen=True)
class InlG(Term):
    body: Term


@dataclass(frozen=True)
class InrG(Term):
    body: Term


@dataclass(frozen=True)
class CaseG(Term):
    q: GradeValue
    subject_scrut: Term
    left: Term
    right: Term


@dataclass(frozen=True)
class ShiftUp(Term):
    """``up[lo->hi] a`` — both the type former and the term intro."""

    mode_lo: str
    mode_hi: str
    body: Term


@dataclass(frozen=True)
class ShiftDown(Term):
    """``down[lo->hi] a`` — shift eliminator."""

    mode_lo: str
    mode_hi: str
    body: Term


@dataclass(frozen=True)
class PiG(Term):
    """Mode-annotated function type ``(x :^q@m A) -o B``."""

    q: GradeValue
    mode: str
    name: str = field(compare=False)
    domain: Term = None  # type: ignore[assignment]
    codomain: Term = None  # type: ignore[assignment]


@dataclass(frozen=True)
class TensorG(Term):
    """Mode-annotated pair type ``(x :^q@m A) (x) B``."""

    q: GradeValue
    mode: str
    name: str = field(compare=False)
    left: Term = None  # type: ignore[assignment]
    right: Term = None  # type: ignore[assignment]


@dataclass(frozen=True)
class OplusG(Term):
    """Many-mode coproduct type ``A (+) B``."""

    left: Term
    right: Term


# ---------------------------------------------------------------------------
# traversal machinery
#
# For every constructor: ordered (field, graded-binders, linear-binders)
# triples.  The order doubles as the left-to-right position order used by
# leftmost-outermost reduction.

_CHILDREN: dict[type, tuple[tuple[str, int, int], ...]] = {
    Var: (),
    LVar: (),
    TypeU: (),
    LinearU: (),
    UnitJType: (),
    UnitJ: (),
    UnitI: (),
    ILin: (),
    UnitIM: (),
    StarM: (),
    Ascribe: (("subject", 0, 0), ("type_", 0, 0)),
    UnitJElim: (("subject_scrut", 0, 0), ("body", 0, 0)),
    Pair: (("left", 0, 0), ("right", 0, 0)),
    PairElim: (("subject_scrut", 0, 0), ("body", 2, 0)),
    Inl: (("body", 0, 0),),
    Inr: (("body", 0, 0),),
    Case: (("subject_scrut", 0, 0), ("left", 0, 0), ("right", 0, 0)),
    Lam: (("body", 1, 0),),
    App: (("fn", 0, 0), ("arg", 0, 0)),
    GWrap: (("body", 0, 0),),
    GradedArrow: (("domain", 0, 0), ("codomain", 1, 0)),
    BoxTimes: (("left", 0, 0), ("right", 1, 0)),
    BoxPlus: (("left", 0, 0), ("right", 0, 0)),
    GAdj: (("body", 0, 0),),
    UnitIElim: (("subject_scrut", 0, 0), ("body", 0, 0)),
    LamLin: (("body", 0, 1),),
    AppLin: (("fn", 0, 0), ("arg", 0, 0)),
    TensorPair: (("left", 0, 0), ("right", 0, 0)),
    TensorElim: (("subject_scrut", 0, 0), ("body", 0, 2)),
    FPair: (("graded_part", 0, 0), ("linear_part", 0, 0)),
    FElim: (("subject_scrut", 0, 0), ("body", 1, 1)),
    GInv: (("body", 0, 0),),
    Lollipop: (("domain", 0, 0), ("codomain", 0, 0)),
    Tensor: (("left", 0, 0), ("right", 0, 0)),
    FAdj: (("domain", 0, 0), ("body", 1, 0)),
    StarElim: (("subject_scrut", 0, 0), ("body", 0, 0)),
    LamG: (("body", 1, 0),),
    AppG: (("fn", 0, 0), ("arg", 0, 0)),
    PairG: (("left", 0, 0), ("right", 0, 0)),
    PairGElim: (("subject_scrut", 0, 0), ("body", 2, 0)),
    InlG: (("body", 0, 0),),
    InrG: (("body", 0, 0),),
    CaseG: (("subject_scrut", 0, 0), ("left", 0, 0), ("right", 0, 0)),
    ShiftUp: (("body", 0, 0),),
    ShiftDown: (("body", 0, 0),),
    PiG: (("domain", 0, 0), ("codomain", 1, 0)),
    TensorG: (("left", 0, 0), ("right", 1, 0)),
    OplusG: (("left", 0, 0), ("right", 0, 0)),
}


def children_spec(t: Term) -> tuple[tuple[str, int, int], ...]:
    return _CHILDREN[type(t)]


def _rebuild(t: Term, new_children: dict[str, Term]) -> Term:
    return replace(t, **new_children) if new_children else t


def transform_vars(
    t: Term,
    on_var: Callable[[int, int, int], Term],
    on_lvar: Callable[[int, int, int], Term],
    gdepth: int = 0,
    ldepth: int = 0,
) -> Term:
    """Rebuild ``t``, mapping each variable through a callback that receives
    the raw index and the graded/linear binder depths at its occurrence."""
    if isinstance(t, Var):
        return on_var(t.ix, gdepth, ldepth)
    if isinstance(t, LVar):
        return on_lvar(t.ix, gdepth, ldepth)
    updates: dict[str, Term] = {}
    for name, gb, lb in _CHILDREN[type(t)]:
        child = getattr(t, name)
        new = transform_vars(child, on_var, on_lvar, gdepth + gb, ldepth + lb)
        if new is not child:
            updates[name] = new
    return _rebuild(t, updates)


def shift_term(t: Term, g_by: int = 0, l_by: int = 0, g_cut: int = 0, l_cut: int = 0) -> Term:
    """Shift free graded variables ``>= g_cut`` by ``g_by`` and free linear
    variables ``>= l_cut`` by ``l_by``."""
    if g_by == 0 and l_by == 0:
        return t

    def on_var(ix: int, gd: int, ld: int) -> Term:
        return Var(ix + g_by) if ix >= g_cut + gd else Var(ix)

    def on_lvar(ix: int, gd: int, ld: int) -> Term:
        return LVar(ix + l_by) if ix >= l_cut + ld else LVar(ix)

    return transform_vars(t, on_var, on_lvar)


def subst_term(t0: Term, x: int, t: Term, zone: Zone = Zone.GRADED, splice_width: int = 0) -> Term:
    """Capture-avoiding substitution ``[t0/x]t`` in the given zone.

    ``x`` is a de Bruijn index valid at ``t``'s root.  ``t0`` is scoped in
    the context *outside* slot ``x`` for the substituted zone, and in ``t``'s
    own context for the other zone.  Indices of the substituted zone above
    ``x`` shift down by one; ``splice_width`` widens that slot instead (used
    when a linear cut splices the substituted term's own linear zone into
    place: indices above ``x`` are adjusted by ``splice_width - 1`` and
    ``t0``'s zone indices land at the slot).
    """
    adjust = splice_width - 1

    if zone is Zone.GRADED:

        def on_var(ix: int, gd: int, ld: int) -> Term:
            rel = ix - gd
            if rel == x:
                return shift_term(t0, g_by=x + gd, l_by=ld)
            if rel > x:
                return Var(ix + adjust)
            return Var(ix)

        def on_lvar(ix: int, gd: int, ld: int) -> Term:
            return LVar(ix)

    else:

        def on_var(ix: int, gd: int, ld: int) -> Term:
            return Var(ix)

        def on_lvar(ix: int, gd: int, ld: int) -> Term:
            rel = ix - ld
            if rel == x:
                return shift_term(t0, g_by=gd, l_by=x + ld)
            if rel > x:
                return LVar(ix + adjust)
            return LVar(ix)

    return transform_vars(t, on_var, on_lvar)


def free_vars(t: Term, zone: Zone = Zone.GRADED) -> set[int]:
    """Root-relative indices of the free variables of one zone."""
    return set(free_var_occurrences(t, zone))


def free_var_occurrences(t: Term, zone: Zone = Zone.GRADED) -> list[int]:
    """Free-variable occurrences (with multiplicity, preorder traversal)."""
    out: list[int] = []

    def walk(t: Term, gd: int, ld: int) -> None:
        if isinstance(t, Var):
            if zone is Zone.GRADED and t.ix >= gd:
                out.append(t.ix - gd)
            return
        if isinstance(t, LVar):
            if zone is Zone.LINEAR and t.ix >= ld:
                out.append(t.ix - ld)
            return
        for name, gb, lb in _CHILDREN[type(t)]:
            walk(getattr(t, name), gd + gb, ld + lb)

    walk(t, 0, 0)
    return out


def well_scoped(t: Term, depth: int, ldepth: int = 0) -> bool:
    """True iff every free variable fits inside the given zone depths."""
    g = free_vars(t, Zone.GRADED)
    l = free_vars(t, Zone.LINEAR)
    return all(i < depth for i in g) and all(i < ldepth for i in l)


def alpha_eq(t1: Term, t2: Term) -> bool:
    """Alpha-equivalence: structural equality ignoring binder-name hints but
    comparing grade and mode annotations (dataclass equality implements it)."""
    return t1 == t2


def subterms(t: Term) -> Iterator[Term]:
    """Preorder traversal of all subterms, ``t`` included."""
    yield t
    for name, _, _ in _CHILDREN[type(t)]:
        yield from subterms(getattr(t, name))


def erase_ascriptions(t: Term) -> Term:
    """Strip every ascription node (they carry no dynamic content)."""
    if isinstance(t, Ascribe):
        return erase_ascriptions(t.subject)
    updates: dict[str, Term] = {}
    for name, _, _ in _CHILDREN[type(t)]:
        child = getattr(t, name)
        new = erase_ascriptions(child)
        if new is not child:
            updates[name] = new
    return _rebuild(t, updates)


# ---------------------------------------------------------------------------
# contexts and judgments


@dataclass(frozen=True)
class GradedContext:
    """Ordered graded-zone entries ``(surface name, type)``; entry types are
    scoped over the preceding entries; names are unique."""

    entries: tuple[tuple[str, Term], ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.entries)

    def extended(self, name: str, type_: Term) -> "GradedContext":
        return GradedContext(self.entries + ((name, type_),))


@dataclass(frozen=True)
class LinearContext:
    """Ordered linear-zone entries ``(surface name, type)``; types are scoped
    over the graded zone only (linear types never depend on linear
    variables); names are unique and disjoint from the graded zone's."""

    entries: tuple[tuple[str, Term], ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.entries)


@dataclass(frozen=True)
class GladContext:
    """Ordered many-mode entries ``(surface name, type, mode id)``; entry
    types are scoped over the preceding entries and formed at the entry's
    mode."""

    entries: tuple[tuple[str, Term, str], ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _, _ in self.entries)

    def modes(self) -> tuple[str, ...]:
        return tuple(m for _, _, m in self.entries)

    def extended(self, name: str, type_: Term, mode: str) -> "GladContext":
        return GladContext(self.entries + ((name, type_, mode),))


@dataclass(frozen=True)
class Judgment:
    """Base class of the six judgment forms."""


@dataclass(frozen=True)
class GradedTyping(Judgment):
    delta: GradeVector
    gctx: GradedContext
    subject: Term
    type_: Term


@dataclass(frozen=True)
class MixedTyping(Judgment):
    delta: GradeVector
    gctx: GradedContext
    lctx: LinearContext
    subject: Term
    type_: Term


@dataclass(frozen=True)
class GladTyping(Judgment):
    delta: GradeVector
    ctx: GladContext
    mode: str
    subject: Term
    type_: Term


@dataclass(frozen=True)
class GradedCtxWF(Judgment):
    delta: GradeVector
    gctx: GradedContext


@dataclass(frozen=True)
class MixedCtxWF(Judgment):
    delta: GradeVector
    gctx: GradedContext
    lctx: LinearContext


@dataclass(frozen=True)
class GladCtxWF(Judgment):
    delta: GradeVector
    ctx: GladContext


def subst_graded_suffix(entries: tuple[tuple[str, Term], ...], t0: Term) -> tuple[tuple[str, Term], ...]:
    """Substitute ``t0`` for the variable the suffix entries' types see at
    index ``k`` (for the k-th suffix entry): the context-substitution clause
    ``[t0/x]Delta'``."""
    return tuple((n, subst_term(t0, k, ty)) for k, (n, ty) in enumerate(entries))


def subst_glad_suffix(
    entries: tuple[tuple[str, Term, str], ...], t0: Term
) -> tuple[tuple[str, Term, str], ...]:
    return tuple((n, subst_term(t0, k, ty), m) for k, (n, ty, m) in enumerate(entries))
