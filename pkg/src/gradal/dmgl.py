"""The two-fragment graded dependent type checker.

Judgments come in a graded fragment (every hypothesis carries a grade from a
single parameter semiring) and a mixed fragment (a graded zone plus an
exactly-once linear zone).  Checking is algorithmic and bidirectional:

* synthesis computes the *exact* usage vector by the rules' arithmetic
  (variables yield unit vectors, application adds ``delta1 + r*delta2``,
  pair introduction ``r*delta1 + delta2``, the case eliminator
  ``q*delta1 + delta2``, weakening is implicit as 0 entries);
* the subusage preorder is consulted only at annotation boundaries: the
  declared vector of a checked judgment, binder grades against the scrutinee
  or goal type's annotation, and the coproduct branch join (pointwise least
  upper bounds; ``GradeMismatch`` when the preorder has none);
* the linear zone is split between premises by occurrence, so acceptance is
  invariant under zone permutation (the exchange rule) and each linear
  hypothesis must be consumed exactly once.

Eliminators synthesize constant motives; checking mode propagates the
expected type into bodies and branches, which recovers the dependent
eliminations the corpus needs.  Bare lambdas and introductions whose type
annotations are not inferable report ``AnnotationMissing`` and can always be
fixed with an ascription ``(t : X)``.

Derivations record the algorithmic run: each node's conclusion is a
self-contained judgment, premises are sub-derivations, and side data holds
rule parameters (annotations, join results, well-formedness witnesses), so a
derivation can be re-checked node by node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

from .errors import CheckError, Code
from .reduction import ConvResult, conv_equiv, whnf
from .semiring import (
    GradeValue,
    GradeVector,
    SemiringSpec,
    leq,
    lub,
    mul,
    one,
    unit_vector,
    vec_add,
    vec_leq,
    vec_scale,
    zero,
    zeros,
)
from .syntax import (
    App,
    Ascribe,
    BoxPlus,
    BoxTimes,
    Case,
    FAdj,
    FElim,
    FPair,
    GAdj,
    GInv,
    GradedArrow,
    GradedContext,
    GradedCtxWF,
    GradedTyping,
    GWrap,
    ILin,
    Inl,
    Inr,
    Judgment,
    Lam,
    LamLin,
    LinearContext,
    LinearU,
    Lollipop,
    LVar,
    MixedCtxWF,
    MixedTyping,
    Pair,
    PairElim,
    Tensor,
    TensorElim,
    TensorPair,
    Term,
    TypeU,
    UnitI,
    UnitIElim,
    UnitJ,
    UnitJElim,
    UnitJType,
    AppLin,
    Var,
    Zone,
    alpha_eq,
    free_var_occurrences,
    free_vars,
    shift_term,
    subst_term,
    transform_vars,
)

_MIXED_ONLY = (UnitI, ILin, UnitIElim, LamLin, AppLin, TensorPair, TensorElim, FPair, FElim, GInv, Lollipop, Tensor, FAdj)


@dataclass
class CheckerConfig:
    """Checker parameters: the grade semiring and the conversion fuel."""

    semiring: SemiringSpec
    fuel: int = 10000


@dataclass(frozen=True)
class Derivation:
    """One node of an algorithmic derivation tree."""

    rule: str
    conclusion: Judgment
    premises: tuple["Derivation", ...] = ()
    side: Mapping[str, Any] = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class GradeSynthesis:
    """The synthesized exact usage vector and type of a term."""

    usage: GradeVector
    type_: Term


# ---------------------------------------------------------------------------
# small helpers


def _mismatch(what: str, expected: str, actual: Term, rule: str | None = None) -> CheckError:
    return CheckError(
        Code.TYPE_MISMATCH,
        f"{what}: expected {expected}, found {type(actual).__name__}",
        rule=rule,
        payload={"actual": actual},
    )


def _conv(cfg: CheckerConfig, actual: Term, expected: Term, what: str, rule: str | None = None) -> None:
    res = conv_equiv(actual, expected, cfg.fuel)
    if res is ConvResult.EQUAL:
        return
    if res is ConvResult.INCONCLUSIVE:
        raise CheckError(
            Code.CONVERSION_INCONCLUSIVE,
            f"{what}: conversion ran out of fuel",
            rule=rule,
            payload={"actual": actual, "expected": expected},
        )
    raise CheckError(
        Code.TYPE_MISMATCH,
        f"{what}: types are not convertible",
        rule=rule,
        payload={"actual": actual, "expected": expected},
    )


def _whnf(cfg: CheckerConfig, t: Term, what: str) -> Term:
    out, exhausted = whnf(t, cfg.fuel)
    if exhausted:
        raise CheckError(
            Code.CONVERSION_INCONCLUSIVE,
            f"{what}: head normalization ran out of fuel",
            payload={"term": t},
        )
    return out


def _no_linear(t: Term, code: Code, what: str, rule: str | None = None) -> None:
    if free_vars(t, Zone.LINEAR):
        raise CheckError(code, f"{what} must not mention linear variables", rule=rule, payload={"term": t})


def _check_vector_semiring(cfg: CheckerConfig, delta: GradeVector) -> None:
    for g in delta:
        if g.semiring.id != cfg.semiring.id:
            raise CheckError(
                Code.SEMIRING_MISMATCH,
                f"grade of semiring '{g.semiring.id}' in a '{cfg.semiring.id}' judgment",
                payload={"expected": cfg.semiring.id, "actual": g.semiring.id},
            )


def restrict_linear(t: Term, keep: list[int], old_len: int, bound: int = 0) -> Term:
    """Renumber ambient linear variables when narrowing the zone to the
    entries at (absolute, left-to-right) positions ``keep``.  ``bound`` many
    innermost indices are the node's own binders and stay fixed."""
    keep_sorted = sorted(keep)
    rank = {p: k for k, p in enumerate(keep_sorted)}
    new_len = len(keep_sorted)

    def on_lvar(ix: int, gd: int, ld: int) -> Term:
        if ix < ld + bound:
            return LVar(ix)
        root_ix = ix - ld - bound
        pos = old_len - 1 - root_ix
        return LVar(new_len - 1 - rank[pos] + ld + bound)

    return transform_vars(t, lambda ix, gd, ld: Var(ix), on_lvar)


def _split_positions(
    node: Term, lctx: LinearContext, children: list[tuple[Term, int]]
) -> list[list[int]]:
    """Occurrence-directed split of the zone's absolute positions among the
    given ``(child, own-binder-count)`` pairs (invariant: the node's zone is
    exactly its free linear variables, once each)."""
    n = len(lctx)
    out: list[list[int]] = []
    claimed: set[int] = set()
    for child, bound in children:
        occ = [i - bound for i in free_var_occurrences(child, Zone.LINEAR) if i >= bound]
        positions = [n - 1 - i for i in occ]
        out.append(positions)
        claimed.update(positions)
    return out


def _narrow(
    child: Term, bound: int, positions: list[int], lctx: LinearContext
) -> tuple[Term, LinearContext]:
    keep = sorted(positions)
    sub = LinearContext(tuple(lctx.entries[p] for p in keep))
    return restrict_linear(child, keep, len(lctx), bound), sub


def _used_once(child: Term, bound: int, names: tuple[str, ...], rule: str) -> None:
    """Each of the ``bound`` innermost linear binders must occur exactly once
    in ``child`` (names given outermost first)."""
    occ = [i for i in free_var_occurrences(child, Zone.LINEAR) if i < bound]
    for b in range(bound):
        count = occ.count(b)
        name = names[bound - 1 - b]
        if count == 0:
            raise CheckError(
                Code.LINEAR_VAR_UNUSED, f"linear variable '{name}' is never used", rule=rule
            )
        if count > 1:
            raise CheckError(
                Code.LINEAR_VAR_REUSED,
                f"linear variable '{name}' is used {count} times",
                rule=rule,
            )


# ---------------------------------------------------------------------------
# context formation


def check_graded_ctx(cfg: CheckerConfig, delta: GradeVector, gctx: GradedContext) -> Derivation:
    """Well-formedness of a graded context against a vector of grades.

    Acceptance does not depend on the grade values, only that the lengths
    match, the grades inhabit the checker's semiring, names are unique, and
    every entry type is well formed over its prefix.
    """
    if len(delta) != len(gctx):
        raise CheckError(
            Code.LENGTH_MISMATCH,
            f"vector of length {len(delta)} against a context of {len(gctx)} entries",
            payload={"vector": len(delta), "context": len(gctx)},
        )
    _check_vector_semiring(cfg, delta)
    seen: set[str] = set()
    der = Derivation("gradedCtx-empty", GradedCtxWF(GradeVector(()), GradedContext(())))
    prefix = GradedContext(())
    for i, (name, ty) in enumerate(gctx.entries):
        if name in seen:
            raise CheckError(Code.DUPLICATE_NAME, f"duplicate context name '{name}'")
        seen.add(name)
        try:
            _, wf = type_wf_graded(cfg, prefix, ty)
        except CheckError as e:
            raise CheckError(
                Code.TYPE_NOT_WF,
                f"type of context entry '{name}' (position {i}) is not well formed: {e.message}",
                rule=e.rule,
                payload={"position": i, "cause": e.code.value},
            ) from e
        prefix = prefix.extended(name, ty)
        der = Derivation(
            "gradedCtx-extend",
            GradedCtxWF(GradeVector(delta.entries[: i + 1]), prefix),
            (der, wf),
        )
    return der


def check_mixed_ctx(
    cfg: CheckerConfig, delta: GradeVector, gctx: GradedContext, lctx: LinearContext
) -> Derivation:
    """Well-formedness of a mixed context: the graded zone as above, plus
    linear entries with fresh names whose types are linear types over the
    full graded zone."""
    gder = check_graded_ctx(cfg, delta, gctx)
    seen = set(gctx.names())
    der = Derivation("mixedCtx-graded", MixedCtxWF(delta, gctx, LinearContext(())), (gder,))
    entries: tuple[tuple[str, Term], ...] = ()
    for i, (name, ty) in enumerate(lctx.entries):
        if name in seen:
            raise CheckError(Code.DUPLICATE_NAME, f"duplicate context name '{name}'")
        seen.add(name)
        try:
            _, wf = type_wf_linear(cfg, gctx, ty)
        except CheckError as e:
            raise CheckError(
                Code.LINEAR_TYPE_NOT_WF,
                f"type of linear entry '{name}' (position {i}) is not well formed: {e.message}",
                rule=e.rule,
                payload={"position": i, "cause": e.code.value},
            ) from e
        entries = entries + ((name, ty),)
        der = Derivation(
            "mixedCtx-extend", MixedCtxWF(delta, gctx, LinearContext(entries)), (der, wf)
        )
    return der


def type_wf_graded(cfg: CheckerConfig, gctx: GradedContext, ty: Term) -> tuple[GradeVector, Derivation]:
    """``ty`` is a graded type over ``gctx``; synthesizes the witness vector."""
    if free_vars(ty, Zone.LINEAR):
        raise CheckError(Code.LINEAR_VAR_IN_TYPE, "a type mentions a linear variable", payload={"type": ty})
    syn, der = infer_graded(cfg, gctx, ty)
    universe = _whnf(cfg, syn.type_, "type well-formedness")
    if not isinstance(universe, TypeU):
        raise CheckError(
            Code.NOT_A_TYPE,
            "not a graded type (its type is not the graded universe)",
            payload={"term": ty, "universe": universe},
        )
    return syn.usage, der


def type_wf_linear(cfg: CheckerConfig, gctx: GradedContext, ty: Term) -> tuple[GradeVector, Derivation]:
    """``ty`` is a linear type over ``gctx``; synthesizes the witness vector."""
    if free_vars(ty, Zone.LINEAR):
        raise CheckError(Code.LINEAR_VAR_IN_TYPE, "a type mentions a linear variable", payload={"type": ty})
    syn, der = infer_graded(cfg, gctx, ty)
    universe = _whnf(cfg, syn.type_, "type well-formedness")
    if not isinstance(universe, LinearU):
        raise CheckError(
            Code.NOT_A_TYPE,
            "not a linear type (its type is not the linear universe)",
            payload={"term": ty, "universe": universe},
        )
    return syn.usage, der


# ---------------------------------------------------------------------------
# graded fragment


def infer_graded(cfg: CheckerConfig, gctx: GradedContext, t: Term) -> tuple[GradeSynthesis, Derivation]:
    """Synthesize the exact usage vector and type of a graded term."""
    s = cfg.semiring
    n = len(gctx)

    match t:
        case Var(ix):
            if ix < 0 or ix >= n:
                raise CheckError(Code.UNBOUND_VAR, f"graded variable index {ix} out of range", rule="G-var")
            pos = n - 1 - ix
            ty = shift_term(gctx.entries[pos][1], g_by=ix + 1)
            syn = GradeSynthesis(unit_vector(s, n, pos), ty)
            return syn, Derivation("G-var", GradedTyping(syn.usage, gctx, t, ty))
        case LVar(_):
            raise CheckError(Code.UNBOUND_VAR, "linear variable in a graded-only position", rule="G-var")
        case UnitJ():
            syn = GradeSynthesis(zeros(s, n), UnitJType())
            return syn, Derivation("G-unitIntro", GradedTyping(syn.usage, gctx, t, syn.type_))
        case UnitJType():
            syn = GradeSynthesis(zeros(s, n), TypeU())
            return syn, Derivation("G-unit", GradedTyping(syn.usage, gctx, t, syn.type_))
        case TypeU():
            syn = GradeSynthesis(zeros(s, n), TypeU())
            return syn, Derivation("G-type", GradedTyping(syn.usage, gctx, t, syn.type_))
        case LinearU():
            syn = GradeSynthesis(zeros(s, n), TypeU())
            return syn, Derivation("G-linear", GradedTyping(syn.usage, gctx, t, syn.type_))
        case ILin():
            syn = GradeSynthesis(zeros(s, n), LinearU())
            return syn, Derivation("G-linearUnit", GradedTyping(syn.usage, gctx, t, syn.type_))
        case Ascribe(subject, ty):
            _no_linear(ty, Code.LINEAR_VAR_IN_TYPE, "an ascription type")
            universe_syn, _ = infer_graded(cfg, gctx, ty)
            head = _whnf(cfg, universe_syn.type_, "ascription")
            if isinstance(head, LinearU):
                raise CheckError(
                    Code.NOT_A_TYPE,
                    "graded term ascribed a linear type",
                    payload={"type": ty},
                )
            if not isinstance(head, TypeU):
                raise CheckError(Code.NOT_A_TYPE, "ascription against a non-type", payload={"type": ty})
            usage, der = check_against_graded(cfg, gctx, subject, ty)
            return GradeSynthesis(usage, ty), der
        case GradedArrow(r, _, dom, cod):
            d1, p1 = type_wf_graded(cfg, gctx, dom)
            ext = gctx.extended(_fresh(gctx.names(), t.name), dom)
            d2ext, p2 = type_wf_graded(cfg, ext, cod)
            usage = vec_add(d1, GradeVector(d2ext.entries[:-1]))
            syn = GradeSynthesis(usage, TypeU())
            return syn, Derivation(
                "G-function", GradedTyping(usage, gctx, t, TypeU()), (p1, p2), {"r": r}
            )
        case BoxTimes(r, _, left, right):
            d1, p1 = type_wf_graded(cfg, gctx, left)
            ext = gctx.extended(_fresh(gctx.names(), t.name), left)
            d2ext, p2 = type_wf_graded(cfg, ext, right)
            usage = vec_add(d1, GradeVector(d2ext.entries[:-1]))
            syn = GradeSynthesis(usage, TypeU())
            return syn, Derivation(
                "G-gradedPair", GradedTyping(usage, gctx, t, TypeU()), (p1, p2), {"r": r}
            )
        case BoxPlus(left, right):
            d1, p1 = type_wf_graded(cfg, gctx, left)
            d2, p2 = type_wf_graded(cfg, gctx, right)
            usage = vec_add(d1, d2)
            return GradeSynthesis(usage, TypeU()), Derivation(
                "G-coproduct", GradedTyping(usage, gctx, t, TypeU()), (p1, p2)
            )
        case GAdj(body):
            d1, p1 = type_wf_linear(cfg, gctx, body)
            return GradeSynthesis(d1, TypeU()), Derivation(
                "G-radj", GradedTyping(d1, gctx, t, TypeU()), (p1,)
            )
        case Lollipop(dom, cod):
            d1, p1 = type_wf_linear(cfg, gctx, dom)
            d2, p2 = type_wf_linear(cfg, gctx, cod)
            usage = vec_add(d1, d2)
            return GradeSynthesis(usage, LinearU()), Derivation(
                "G-linearFunction", GradedTyping(usage, gctx, t, LinearU()), (p1, p2)
            )
        case Tensor(left, right):
            d1, p1 = type_wf_linear(cfg, gctx, left)
            d2, p2 = type_wf_linear(cfg, gctx, right)
            usage = vec_add(d1, d2)
            return GradeSynthesis(usage, LinearU()), Derivation(
                "G-tensor", GradedTyping(usage, gctx, t, LinearU()), (p1, p2)
            )
        case FAdj(r, _, dom, body):
            d1, p1 = type_wf_graded(cfg, gctx, dom)
            ext = gctx.extended(_fresh(gctx.names(), t.name), dom)
            d2ext, p2 = type_wf_linear(cfg, ext, body)
            usage = vec_add(d1, GradeVector(d2ext.entries[:-1]))
            return GradeSynthesis(usage, LinearU()), Derivation(
                "G-ladj", GradedTyping(usage, gctx, t, LinearU()), (p1, p2), {"r": r}
            )
        case App(fn, arg):
            syn1, p1 = infer_graded(cfg, gctx, fn)
            head = _whnf(cfg, syn1.type_, "application head")
            if not isinstance(head, GradedArrow):
                raise _mismatch("application head", "a graded function type", head, "G-app")
            u2, p2 = check_against_graded(cfg, gctx, arg, head.domain)
            usage = vec_add(syn1.usage, vec_scale(head.r, u2))
            ty = subst_term(arg, 0, head.codomain)
            return GradeSynthesis(usage, ty), Derivation(
                "G-app", GradedTyping(usage, gctx, t, ty), (p1, p2), {"r": head.r}
            )
        case UnitJElim(scrut, body):
            syn1, p1 = infer_graded(cfg, gctx, scrut)
            head = _whnf(cfg, syn1.type_, "unit eliminator scrutinee")
            if not isinstance(head, UnitJType):
                raise _mismatch("unit eliminator scrutinee", "the graded unit type", head, "G-unitElim")
            syn3, p3 = infer_graded(cfg, gctx, body)
            usage = vec_add(syn1.usage, syn3.usage)
            return GradeSynthesis(usage, syn3.type_), Derivation(
                "G-unitElim", GradedTyping(usage, gctx, t, syn3.type_), (p1, p3)
            )
        case PairElim(_, _, scrut, body):
            return _infer_pair_elim(cfg, gctx, t, scrut, body, goal=None)
        case Case(q, scrut, left, right):
            return _infer_case(cfg, gctx, t, q, scrut, left, right, goal=None)
        case GWrap(body):
            _no_linear(body, Code.NON_EMPTY_LINEAR_ZONE, "the body of a right-adjoint intro", "G-radjIntro")
            syn, p1 = infer_mixed(cfg, gctx, LinearContext(()), body)
            ty = GAdj(syn.type_)
            return GradeSynthesis(syn.usage, ty), Derivation(
                "G-radjIntro", GradedTyping(syn.usage, gctx, t, ty), (p1,)
            )
        case Lam() | Pair() | Inl() | Inr():
            raise CheckError(
                Code.ANNOTATION_MISSING,
                f"cannot infer a type for a bare {type(t).__name__.lower()} introduction; "
                "add an ascription '(t : X)'",
                payload={"term": t},
            )
        case _ if isinstance(t, _MIXED_ONLY):
            raise CheckError(
                Code.TYPE_MISMATCH,
                f"mixed-fragment term {type(t).__name__} in a graded position",
                payload={"term": t},
            )
        case _:
            raise CheckError(
                Code.TYPE_MISMATCH,
                f"term {type(t).__name__} does not belong to the graded fragment",
                payload={"term": t},
            )


def _fresh(names: tuple[str, ...], hint: str) -> str:
    if hint not in names and hint != "_":
        return hint
    base = hint if hint != "_" else "x"
    k = 0
    cand = base
    while cand in names:
        k += 1
        cand = f"{base}{k}"
    return cand


def _infer_pair_elim(
    cfg: CheckerConfig,
    gctx: GradedContext,
    t: PairElim,
    scrut: Term,
    body: Term,
    goal: Term | None,
) -> tuple[GradeSynthesis, Derivation]:
    syn1, p1 = infer_graded(cfg, gctx, scrut)
    head = _whnf(cfg, syn1.type_, "pair eliminator scrutinee")
    if not isinstance(head, BoxTimes):
        raise _mismatch("pair eliminator scrutinee", "a graded pair type", head, "G-gradedPairElim")
    n1 = _fresh(gctx.names(), t.name1)
    ext1 = gctx.extended(n1, head.left)
    ext2 = ext1.extended(_fresh(ext1.names(), t.name2), head.right)
    if goal is None:
        syn2, p2 = infer_graded(cfg, ext2, body)
        ty_body = syn2.type_
        if free_vars(ty_body) & {0, 1}:
            raise CheckError(
                Code.ANNOTATION_MISSING,
                "the type of a pair eliminator body mentions the bound variables; "
                "ascribe the eliminator",
                rule="G-gradedPairElim",
            )
        result_ty = shift_term(ty_body, g_by=-2, g_cut=2)
        u2 = syn2.usage
    else:
        u2, p2 = check_against_graded(cfg, ext2, body, shift_term(goal, g_by=2))
        result_ty = goal
    g_x, g_y = u2.entries[-2], u2.entries[-1]
    q = g_y
    if not leq(g_x, mul(head.r, q)):
        raise CheckError(
            Code.GRADE_MISMATCH,
            "pair eliminator binder grades do not fit the annotation "
            f"(first component used {g_x.value!r}, allowed {mul(head.r, q).value!r})",
            rule="G-gradedPairElim",
            payload={"r": head.r, "q": q, "gx": g_x},
        )
    usage = vec_add(vec_scale(q, syn1.usage), GradeVector(u2.entries[:-2]))
    syn = GradeSynthesis(usage, result_ty)
    return syn, Derivation(
        "G-gradedPairElim",
        GradedTyping(usage, gctx, t, result_ty),
        (p1, p2),
        {"r": head.r, "q": q},
    )


def _branch_join(cfg: CheckerConfig, u1: GradeVector, u2: GradeVector, rule: str) -> GradeVector:
    if u1 == u2:
        return u1
    joined = []
    for a, b in zip(u1, u2):
        j = lub(a, b)
        if j is None:
            raise CheckError(
                Code.GRADE_MISMATCH,
                f"coproduct branches use grades {a.value!r} and {b.value!r} "
                "with no least upper bound",
                rule=rule,
                payload={"left": a, "right": b},
            )
        joined.append(j)
    return GradeVector(tuple(joined))


def _infer_case(
    cfg: CheckerConfig,
    gctx: GradedContext,
    t: Case,
    q: GradeValue,
    scrut: Term,
    left: Term,
    right: Term,
    goal: Term | None,
) -> tuple[GradeSynthesis, Derivation]:
    s = cfg.semiring
    if q.semiring.id != s.id:
        raise CheckError(
            Code.SEMIRING_MISMATCH,
            f"case annotation from semiring '{q.semiring.id}' in a '{s.id}' judgment",
            rule="G-coproductElim",
        )
    if not leq(one(s), q):
        raise CheckError(
            Code.GRADE_MISMATCH,
            f"case annotation must satisfy 1 <= q; got {q.value!r}",
            rule="G-coproductElim",
            payload={"q": q},
        )
    syn1, p1 = infer_graded(cfg, gctx, scrut)
    head = _whnf(cfg, syn1.type_, "case scrutinee")
    if not isinstance(head, BoxPlus):
        raise _mismatch("case scrutinee", "a coproduct type", head, "G-coproductElim")
    if goal is not None:
        shifted = shift_term(goal, g_by=1)
        ty_l = GradedArrow(q, "x", head.left, shifted)
        ty_r = GradedArrow(q, "x", head.right, shifted)
        u_l, p2 = check_against_graded(cfg, gctx, left, ty_l)
        u_r, p3 = check_against_graded(cfg, gctx, right, ty_r)
        bty_l, bty_r = ty_l, ty_r
        result_ty = goal
    else:
        syn_l, p2 = infer_graded(cfg, gctx, left)
        syn_r, p3 = infer_graded(cfg, gctx, right)
        head_l = _whnf(cfg, syn_l.type_, "case left branch")
        head_r = _whnf(cfg, syn_r.type_, "case right branch")
        if not isinstance(head_l, GradedArrow) or not isinstance(head_r, GradedArrow):
            raise CheckError(
                Code.TYPE_MISMATCH,
                "case branches must be functions from the injected components",
                rule="G-coproductElim",
            )
        if head_l.r != q or head_r.r != q:
            raise CheckError(
                Code.GRADE_MISMATCH,
                "case branch annotations must match the case grade "
                f"{q.value!r} (got {head_l.r.value!r} and {head_r.r.value!r})",
                rule="G-coproductElim",
            )
        _conv(cfg, head_l.domain, head.left, "left branch domain", "G-coproductElim")
        _conv(cfg, head_r.domain, head.right, "right branch domain", "G-coproductElim")
        if 0 in free_vars(head_l.codomain) or 0 in free_vars(head_r.codomain):
            raise CheckError(
                Code.ANNOTATION_MISSING,
                "case branch result types mention the bound variable; ascribe the case",
                rule="G-coproductElim",
            )
        cod_l = shift_term(head_l.codomain, g_by=-1, g_cut=1)
        cod_r = shift_term(head_r.codomain, g_by=-1, g_cut=1)
        _conv(cfg, cod_l, cod_r, "case branch result types", "G-coproductElim")
        u_l, u_r = syn_l.usage, syn_r.usage
        bty_l, bty_r = syn_l.type_, syn_r.type_
        result_ty = cod_l
    u_branches = _branch_join(cfg, u_l, u_r, "G-coproductElim")
    # Weakening a branch to the join is a genuine subusage step; record it so
    # exactness analyses can see that the joined vector is not branch-exact.
    if u_l != u_branches:
        p2 = Derivation(
            "G-subusage",
            GradedTyping(u_branches, gctx, left, bty_l),
            (p2,),
            {"synthesized": u_l},
        )
    if u_r != u_branches:
        p3 = Derivation(
            "G-subusage",
            GradedTyping(u_branches, gctx, right, bty_r),
            (p3,),
            {"synthesized": u_r},
        )
    usage = vec_add(vec_scale(q, syn1.usage), u_branches)
    syn = GradeSynthesis(usage, result_ty)
    return syn, Derivation(
        "G-coproductElim",
        GradedTyping(usage, gctx, t, result_ty),
        (p1, p2, p3),
        {"q": q, "join": u_branches},
    )


def check_against_graded(
    cfg: CheckerConfig, gctx: GradedContext, t: Term, expected: Term
) -> tuple[GradeVector, Derivation]:
    """Bidirectional checking against a goal type; returns the exact usage."""
    match t:
        case Lam(_, body):
            head = _whnf(cfg, expected, "lambda goal")
            if not isinstance(head, GradedArrow):
                raise _mismatch("lambda", "a graded function type", head, "G-lambda")
            ext = gctx.extended(_fresh(gctx.names(), t.name), head.domain)
            u_ext, p1 = check_against_graded(cfg, ext, body, head.codomain)
            g = u_ext.entries[-1]
            if not leq(g, head.r):
                raise CheckError(
                    Code.GRADE_MISMATCH,
                    f"lambda binder used {g.value!r}, annotated {head.r.value!r}",
                    rule="G-lambda",
                    payload={"used": g, "annotated": head.r},
                )
            usage = GradeVector(u_ext.entries[:-1])
            return usage, Derivation(
                "G-lambda",
                GradedTyping(usage, gctx, t, head),
                (p1,),
                {"r": head.r, "binder_usage": g},
            )
        case Pair(left, right):
            head = _whnf(cfg, expected, "pair goal")
            if not isinstance(head, BoxTimes):
                raise _mismatch("pair", "a graded pair type", head, "G-gradedPairIntro")
            u1, p1 = check_against_graded(cfg, gctx, left, head.left)
            u2, p2 = check_against_graded(cfg, gctx, right, subst_term(left, 0, head.right))
            usage = vec_add(vec_scale(head.r, u1), u2)
            return usage, Derivation(
                "G-gradedPairIntro",
                GradedTyping(usage, gctx, t, head),
                (p1, p2),
                {"r": head.r},
            )
        case Inl(body):
            head = _whnf(cfg, expected, "left injection goal")
            if not isinstance(head, BoxPlus):
                raise _mismatch("left injection", "a coproduct type", head, "G-coproductInl")
            u, p1 = check_against_graded(cfg, gctx, body, head.left)
            return u, Derivation("G-coproductInl", GradedTyping(u, gctx, t, head), (p1,))
        case Inr(body):
            head = _whnf(cfg, expected, "right injection goal")
            if not isinstance(head, BoxPlus):
                raise _mismatch("right injection", "a coproduct type", head, "G-coproductInr")
            u, p1 = check_against_graded(cfg, gctx, body, head.right)
            return u, Derivation("G-coproductInr", GradedTyping(u, gctx, t, head), (p1,))
        case UnitJElim(scrut, body):
            syn1, p1 = infer_graded(cfg, gctx, scrut)
            head = _whnf(cfg, syn1.type_, "unit eliminator scrutinee")
            if not isinstance(head, UnitJType):
                raise _mismatch("unit eliminator scrutinee", "the graded unit type", head, "G-unitElim")
            u3, p3 = check_against_graded(cfg, gctx, body, expected)
            usage = vec_add(syn1.usage, u3)
            return usage, Derivation(
                "G-unitElim", GradedTyping(usage, gctx, t, expected), (p1, p3)
            )
        case PairElim(_, _, scrut, body):
            syn, der = _infer_pair_elim(cfg, gctx, t, scrut, body, goal=expected)
            return syn.usage, der
        case Case(q, scrut, left, right):
            syn, der = _infer_case(cfg, gctx, t, q, scrut, left, right, goal=expected)
            return syn.usage, der
        case Ascribe(subject, ty):
            syn, der = infer_graded(cfg, gctx, t)
            _conv(cfg, ty, expected, "ascription against the goal type")
            return syn.usage, der
        case _:
            syn, der = infer_graded(cfg, gctx, t)
            if alpha_eq(syn.type_, expected):
                return syn.usage, der
            _conv(cfg, syn.type_, expected, "synthesized type against the goal", "G-convert")
            d0, _wf = type_wf_graded(cfg, gctx, expected)
            return syn.usage, Derivation(
                "G-convert",
                GradedTyping(syn.usage, gctx, t, expected),
                (der,),
                {"delta0": d0},
            )


def check_graded(
    cfg: CheckerConfig, delta: GradeVector, gctx: GradedContext, t: Term, expected: Term
) -> Derivation:
    """Full graded check: context, goal type, synthesis, and the single
    trailing subusage comparison against the declared vector."""
    check_graded_ctx(cfg, delta, gctx)
    type_wf_graded(cfg, gctx, expected)
    usage, der = check_against_graded(cfg, gctx, t, expected)
    if usage == delta:
        return der
    if not vec_leq(usage, delta):
        raise CheckError(
            Code.SUBUSAGE_FAILED,
            "synthesized usage is not below the declared vector",
            rule="G-subusage",
            payload={"synthesized": usage, "declared": delta},
        )
    return Derivation(
        "G-subusage",
        GradedTyping(delta, gctx, t, expected),
        (der,),
        {"synthesized": usage},
    )


# ---------------------------------------------------------------------------
# mixed fragment


def infer_mixed(
    cfg: CheckerConfig, gctx: GradedContext, lctx: LinearContext, t: Term
) -> tuple[GradeSynthesis, Derivation]:
    """Synthesize the graded usage and linear type of a mixed term, verifying
    that the linear zone is consumed exactly once."""
    _validate_consumption(lctx, t)
    return _infer_mixed(cfg, gctx, lctx, t)


def _validate_consumption(lctx: LinearContext, t: Term) -> None:
    occ = free_var_occurrences(t, Zone.LINEAR)
    n = len(lctx)
    for i in occ:
        if i >= n:
            raise CheckError(Code.UNBOUND_VAR, f"linear variable index {i} out of range")
    for pos in range(n):
        ix = n - 1 - pos
        count = occ.count(ix)
        name = lctx.entries[pos][0]
        if count == 0:
            raise CheckError(Code.LINEAR_VAR_UNUSED, f"linear variable '{name}' is never used")
        if count > 1:
            raise CheckError(Code.LINEAR_VAR_REUSED, f"linear variable '{name}' is used {count} times")


def _infer_mixed(
    cfg: CheckerConfig, gctx: GradedContext, lctx: LinearContext, t: Term
) -> tuple[GradeSynthesis, Derivation]:
    s = cfg.semiring
    n = len(gctx)

    match t:
        case LVar(ix):
            # the splitting invariant routes exactly this entry here
            if len(lctx) != 1 or ix != 0:
                raise CheckError(Code.UNBOUND_VAR, f"linear variable index {ix} out of range", rule="M-id")
            ty = lctx.entries[0][1]
            syn = GradeSynthesis(zeros(s, n), ty)
            return syn, Derivation("M-id", MixedTyping(syn.usage, gctx, lctx, t, ty))
        case UnitI():
            syn = GradeSynthesis(zeros(s, n), ILin())
            return syn, Derivation("M-unitIntro", MixedTyping(syn.usage, gctx, lctx, t, ILin()))
        case UnitIElim(scrut, body):
            (pos1, pos2) = _split_positions(t, lctx, [(scrut, 0), (body, 0)])
            scrut_t, scrut_l = _narrow(scrut, 0, pos1, lctx)
            body_t, body_l = _narrow(body, 0, pos2, lctx)
            syn1, p1 = _infer_mixed(cfg, gctx, scrut_l, scrut_t)
            head = _whnf(cfg, syn1.type_, "unit eliminator scrutinee")
            if not isinstance(head, ILin):
                raise _mismatch("unit eliminator scrutinee", "the linear unit type", head, "M-unitElim")
            syn2, p2 = _infer_mixed(cfg, gctx, body_l, body_t)
            usage = vec_add(syn1.usage, syn2.usage)
            return GradeSynthesis(usage, syn2.type_), Derivation(
                "M-unitElim", MixedTyping(usage, gctx, lctx, t, syn2.type_), (p1, p2)
            )
        case AppLin(fn, arg):
            (pos1, pos2) = _split_positions(t, lctx, [(fn, 0), (arg, 0)])
            fn_t, fn_l = _narrow(fn, 0, pos1, lctx)
            arg_t, arg_l = _narrow(arg, 0, pos2, lctx)
            syn1, p1 = _infer_mixed(cfg, gctx, fn_l, fn_t)
            head = _whnf(cfg, syn1.type_, "linear application head")
            if not isinstance(head, Lollipop):
                raise _mismatch("linear application head", "a linear function type", head, "M-app")
            u2, p2 = check_against_mixed(cfg, gctx, arg_l, arg_t, head.domain)
            usage = vec_add(syn1.usage, u2)
            return GradeSynthesis(usage, head.codomain), Derivation(
                "M-app", MixedTyping(usage, gctx, lctx, t, head.codomain), (p1, p2)
            )
        case TensorPair(left, right):
            (pos1, pos2) = _split_positions(t, lctx, [(left, 0), (right, 0)])
            left_t, left_l = _narrow(left, 0, pos1, lctx)
            right_t, right_l = _narrow(right, 0, pos2, lctx)
            syn1, p1 = _infer_mixed(cfg, gctx, left_l, left_t)
            syn2, p2 = _infer_mixed(cfg, gctx, right_l, right_t)
            usage = vec_add(syn1.usage, syn2.usage)
            ty = Tensor(syn1.type_, syn2.type_)
            return GradeSynthesis(usage, ty), Derivation(
                "M-tensorIntro", MixedTyping(usage, gctx, lctx, t, ty), (p1, p2)
            )
        case TensorElim(_, _, scrut, body):
            return _infer_tensor_elim(cfg, gctx, lctx, t, scrut, body, goal=None)
        case FElim(_, _, scrut, body):
            return _infer_f_elim(cfg, gctx, lctx, t, scrut, body, goal=None)
        case GInv(body):
            _no_linear(body, Code.NON_EMPTY_LINEAR_ZONE, "the body of a right-adjoint elimination", "M-radjElim")
            syn, p1 = infer_graded(cfg, gctx, body)
            head = _whnf(cfg, syn.type_, "right-adjoint elimination")
            if not isinstance(head, GAdj):
                raise _mismatch("right-adjoint elimination", "a right-adjoint type", head, "M-radjElim")
            return GradeSynthesis(syn.usage, head.body), Derivation(
                "M-radjElim", MixedTyping(syn.usage, gctx, lctx, t, head.body), (p1,)
            )
        case Ascribe(subject, ty):
            _no_linear(ty, Code.LINEAR_VAR_IN_TYPE, "an ascription type")
            type_wf_linear(cfg, gctx, ty)
            usage, der = check_against_mixed(cfg, gctx, lctx, subject, ty)
            return GradeSynthesis(usage, ty), der
        case LamLin() | FPair():
            raise CheckError(
                Code.ANNOTATION_MISSING,
                f"cannot infer a type for a bare {type(t).__name__} introduction; "
                "add an ascription '(l : A)'",
                payload={"term": t},
            )
        case _:
            raise CheckError(
                Code.TYPE_MISMATCH,
                f"term {type(t).__name__} does not belong to the mixed fragment",
                payload={"term": t},
            )


def _infer_tensor_elim(
    cfg: CheckerConfig,
    gctx: GradedContext,
    lctx: LinearContext,
    t: TensorElim,
    scrut: Term,
    body: Term,
    goal: Term | None,
) -> tuple[GradeSynthesis, Derivation]:
    (pos1, pos2) = _split_positions(t, lctx, [(scrut, 0), (body, 2)])
    scrut_t, scrut_l = _narrow(scrut, 0, pos1, lctx)
    syn1, p1 = _infer_mixed(cfg, gctx, scrut_l, scrut_t)
    head = _whnf(cfg, syn1.type_, "tensor eliminator scrutinee")
    if not isinstance(head, Tensor):
        raise _mismatch("tensor eliminator scrutinee", "a tensor type", head, "M-tensorElim")
    _used_once(body, 2, (t.name1, t.name2), "M-tensorElim")
    body_t, body_amb = _narrow(body, 2, pos2, lctx)
    body_l = LinearContext(body_amb.entries + ((t.name1, head.left), (t.name2, head.right)))
    if goal is None:
        syn2, p2 = _infer_mixed(cfg, gctx, body_l, body_t)
        result_ty = syn2.type_
        u2 = syn2.usage
    else:
        u2, p2 = check_against_mixed(cfg, gctx, body_l, body_t, goal)
        result_ty = goal
    usage = vec_add(syn1.usage, u2)
    return GradeSynthesis(usage, result_ty), Derivation(
        "M-tensorElim", MixedTyping(usage, gctx, lctx, t, result_ty), (p1, p2)
    )


def _infer_f_elim(
    cfg: CheckerConfig,
    gctx: GradedContext,
    lctx: LinearContext,
    t: FElim,
    scrut: Term,
    body: Term,
    goal: Term | None,
) -> tuple[GradeSynthesis, Derivation]:
    (pos1, pos2) = _split_positions(t, lctx, [(scrut, 0), (body, 1)])
    scrut_t, scrut_l = _narrow(scrut, 0, pos1, lctx)
    syn1, p1 = _infer_mixed(cfg, gctx, scrut_l, scrut_t)
    head = _whnf(cfg, syn1.type_, "left-adjoint eliminator scrutinee")
    if not isinstance(head, FAdj):
        raise _mismatch("left-adjoint eliminator scrutinee", "a left-adjoint type", head, "M-ladjElim")
    _used_once(body, 1, (t.lname,), "M-ladjElim")
    gext = gctx.extended(_fresh(gctx.names(), t.gname), head.domain)
    body_t, body_amb = _narrow(body, 1, pos2, lctx)
    # ambient linear types are scoped over the unextended graded zone
    shifted_amb = tuple((nm, shift_term(ty, g_by=1)) for nm, ty in body_amb.entries)
    body_l = LinearContext(shifted_amb + ((t.lname, head.body),))
    if goal is None:
        syn2, p2 = _infer_mixed(cfg, gext, body_l, body_t)
        u_ext, result_ext = syn2.usage, syn2.type_
        if 0 in free_vars(result_ext):
            raise CheckError(
                Code.ANNOTATION_MISSING,
                "the type of a left-adjoint eliminator body mentions the bound variable; "
                "ascribe the eliminator",
                rule="M-ladjElim",
            )
        result_ty = shift_term(result_ext, g_by=-1, g_cut=1)
    else:
        u_ext, p2 = check_against_mixed(cfg, gext, body_l, body_t, shift_term(goal, g_by=1))
        result_ty = goal
    g_x = u_ext.entries[-1]
    if not leq(g_x, head.r):
        raise CheckError(
            Code.GRADE_MISMATCH,
            f"left-adjoint binder used {g_x.value!r}, annotated {head.r.value!r}",
            rule="M-ladjElim",
            payload={"used": g_x, "annotated": head.r},
        )
    usage = vec_add(syn1.usage, GradeVector(u_ext.entries[:-1]))
    return GradeSynthesis(usage, result_ty), Derivation(
        "M-ladjElim",
        MixedTyping(usage, gctx, lctx, t, result_ty),
        (p1, p2),
        {"q": head.r, "binder_usage": g_x},
    )


def check_against_mixed(
    cfg: CheckerConfig, gctx: GradedContext, lctx: LinearContext, t: Term, expected: Term
) -> tuple[GradeVector, Derivation]:
    """Bidirectional mixed checking against a goal linear type."""
    match t:
        case LamLin(_, body):
            head = _whnf(cfg, expected, "linear lambda goal")
            if not isinstance(head, Lollipop):
                raise _mismatch("linear lambda", "a linear function type", head, "M-lambda")
            _used_once(body, 1, (t.name,), "M-lambda")
            body_l = LinearContext(lctx.entries + ((t.name, head.domain),))
            u, p1 = check_against_mixed(cfg, gctx, body_l, body, head.codomain)
            return u, Derivation("M-lambda", MixedTyping(u, gctx, lctx, t, head), (p1,))
        case TensorPair(left, right):
            head = _whnf(cfg, expected, "tensor pair goal")
            if not isinstance(head, Tensor):
                raise _mismatch("tensor pair", "a tensor type", head, "M-tensorIntro")
            (pos1, pos2) = _split_positions(t, lctx, [(left, 0), (right, 0)])
            left_t, left_l = _narrow(left, 0, pos1, lctx)
            right_t, right_l = _narrow(right, 0, pos2, lctx)
            u1, p1 = check_against_mixed(cfg, gctx, left_l, left_t, head.left)
            u2, p2 = check_against_mixed(cfg, gctx, right_l, right_t, head.right)
            usage = vec_add(u1, u2)
            return usage, Derivation(
                "M-tensorIntro", MixedTyping(usage, gctx, lctx, t, head), (p1, p2)
            )
        case FPair(graded_part, linear_part):
            head = _whnf(cfg, expected, "left-adjoint pair goal")
            if not isinstance(head, FAdj):
                raise _mismatch("left-adjoint pair", "a left-adjoint type", head, "M-ladjIntro")
            _no_linear(graded_part, Code.NON_EMPTY_LINEAR_ZONE, "the graded part of a left-adjoint intro", "M-ladjIntro")
            u1, p1 = check_against_graded(cfg, gctx, graded_part, head.domain)
            expected_l = subst_term(graded_part, 0, head.body)
            u2, p2 = check_against_mixed(cfg, gctx, lctx, linear_part, expected_l)
            usage = vec_add(vec_scale(head.r, u1), u2)
            return usage, Derivation(
                "M-ladjIntro",
                MixedTyping(usage, gctx, lctx, t, head),
                (p1, p2),
                {"r": head.r},
            )
        case UnitIElim(scrut, body):
            (pos1, pos2) = _split_positions(t, lctx, [(scrut, 0), (body, 0)])
            scrut_t, scrut_l = _narrow(scrut, 0, pos1, lctx)
            body_t, body_l = _narrow(body, 0, pos2, lctx)
            syn1, p1 = _infer_mixed(cfg, gctx, scrut_l, scrut_t)
            head = _whnf(cfg, syn1.type_, "unit eliminator scrutinee")
            if not isinstance(head, ILin):
                raise _mismatch("unit eliminator scrutinee", "the linear unit type", head, "M-unitElim")
            u2, p2 = check_against_mixed(cfg, gctx, body_l, body_t, expected)
            usage = vec_add(syn1.usage, u2)
            return usage, Derivation(
                "M-unitElim", MixedTyping(usage, gctx, lctx, t, expected), (p1, p2)
            )
        case TensorElim(_, _, scrut, body):
            syn, der = _infer_tensor_elim(cfg, gctx, lctx, t, scrut, body, goal=expected)
            return syn.usage, der
        case FElim(_, _, scrut, body):
            syn, der = _infer_f_elim(cfg, gctx, lctx, t, scrut, body, goal=expected)
            return syn.usage, der
        case Ascribe(subject, ty):
            syn, der = _infer_mixed(cfg, gctx, lctx, t)
            _conv(cfg, ty, expected, "ascription against the goal type")
            return syn.usage, der
        case _:
            syn, der = _infer_mixed(cfg, gctx, lctx, t)
            if alpha_eq(syn.type_, expected):
                return syn.usage, der
            _conv(cfg, syn.type_, expected, "synthesized type against the goal", "M-convert")
            d0, _wf = type_wf_linear(cfg, gctx, expected)
            return syn.usage, Derivation(
                "M-convert",
                MixedTyping(syn.usage, gctx, lctx, t, expected),
                (der,),
                {"delta0": d0},
            )


def check_mixed(
    cfg: CheckerConfig,
    delta: GradeVector,
    gctx: GradedContext,
    lctx: LinearContext,
    t: Term,
    expected: Term,
) -> Derivation:
    """Full mixed check: contexts, goal type, exactly-once consumption,
    synthesis, and the single trailing subusage on the graded vector.
    Acceptance is invariant under permutations of the linear zone."""
    check_mixed_ctx(cfg, delta, gctx, lctx)
    type_wf_linear(cfg, gctx, expected)
    _validate_consumption(lctx, t)
    usage, der = check_against_mixed(cfg, gctx, lctx, t, expected)
    if usage == delta:
        return der
    if not vec_leq(usage, delta):
        raise CheckError(
            Code.SUBUSAGE_FAILED,
            "synthesized usage is not below the declared vector",
            rule="M-subusage",
            payload={"synthesized": usage, "declared": delta},
        )
    return Derivation(
        "M-subusage",
        MixedTyping(delta, gctx, lctx, t, expected),
        (der,),
        {"synthesized": usage},
    )
