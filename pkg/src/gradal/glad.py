"""The many-mode graded dependent type checker.

Judgments are mode-indexed: the context assigns each hypothesis a mode, the
grade vector is heterogeneous (entry ``i`` is graded in the semiring of entry
``i``'s mode), and a judgment at ambient mode ``m`` requires ``m`` to sit
below the mode of every hypothesis in the mode preorder (``ModeViolation``
otherwise).  Grades cross modes through the theory's semiring morphisms:
scaling an argument vector by the annotation ``q`` applies the morphism from
the annotation's mode into each entry's mode first.

Weakening is a per-mode permission.  A hypothesis whose variable does not
occur in the subject term of a judgment is being dropped; that is allowed
only when its mode admits weakening (``WeakeningForbidden`` otherwise).  The
gate is applied where a hypothesis's scope closes: at the top level of
:func:`check_glad` for ambient hypotheses, and at every binder premise for
the bound one.  A grade of zero produced by arithmetic over an *occurring*
variable is not weakening and needs no permission.

The discipline mirrors the two-fragment checker: synthesis computes exact
usage by rule arithmetic, the subusage preorder only fires at annotation
boundaries, eliminators synthesize constant motives, and checking mode
propagates the goal into bodies and branches.  Mode shifts move terms along
the mode order: raising wraps a lower-mode term into the shifted type at the
higher mode, unraising eliminates it, both leaving usage untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CheckError, Code
from .dmgl import Derivation, GradeSynthesis, _mismatch
from .modes import ModeTheory, cross_scale, mode_leq, scale_into
from .reduction import ConvResult, conv_equiv, whnf
from .semiring import (
    GradeValue,
    GradeVector,
    leq,
    lub,
    mul,
    one,
    unit_vector,
    vec_add,
    vec_leq,
    zero,
)
from .syntax import (
    AppG,
    Ascribe,
    CaseG,
    GladContext,
    GladCtxWF,
    GladTyping,
    InlG,
    InrG,
    LamG,
    LVar,
    OplusG,
    PairG,
    PairGElim,
    PiG,
    ShiftDown,
    ShiftUp,
    StarElim,
    StarM,
    TensorG,
    Term,
    TypeU,
    UnitIM,
    Var,
    alpha_eq,
    free_vars,
    shift_term,
    subst_term,
)


@dataclass
class GladCheckerConfig:
    """Checker parameters: the mode theory, conversion fuel, and whether
    variables standing for types must match the ambient mode exactly."""

    theory: ModeTheory
    fuel: int = 10000
    strict_types: bool = False


# ---------------------------------------------------------------------------
# vector helpers over heterogeneous contexts


def _modes(ctx: GladContext) -> tuple[str, ...]:
    return ctx.modes()


def _glad_zeros(cfg: GladCheckerConfig, ctx: GladContext) -> GradeVector:
    return GradeVector(tuple(zero(cfg.theory.semiring_of(m)) for m in ctx.modes()))


def _glad_unit(cfg: GladCheckerConfig, ctx: GladContext, pos: int) -> GradeVector:
    out = []
    for i, m in enumerate(ctx.modes()):
        s = cfg.theory.semiring_of(m)
        out.append(one(s) if i == pos else zero(s))
    return GradeVector(tuple(out))


def _branch_join(u1: GradeVector, u2: GradeVector, rule: str) -> GradeVector:
    if u1 == u2:
        return u1
    joined = []
    for a, b in zip(u1, u2):
        j = lub(a, b)
        if j is None:
            raise CheckError(
                Code.GRADE_MISMATCH,
                f"branches use grades {a.value!r} and {b.value!r} with no least upper bound",
                rule=rule,
                payload={"left": a, "right": b},
            )
        joined.append(j)
    return GradeVector(tuple(joined))


def _invariant(cfg: GladCheckerConfig, ctx: GladContext, mode: str) -> None:
    mt = cfg.theory
    mt.mode(mode)
    for name, _, m in ctx.entries:
        if not mode_leq(mt, mode, m):
            raise CheckError(
                Code.MODE_VIOLATION,
                f"judgment at mode '{mode}' over a hypothesis '{name}' at mode '{m}' "
                "not above it",
                payload={"ambient": mode, "entry": m},
            )


def _gate_binders(
    cfg: GladCheckerConfig, body: Term, binders: tuple[tuple[str, str], ...], rule: str
) -> None:
    """Each of the innermost ``binders`` (name, mode; outermost first) must
    occur in ``body`` unless its mode admits weakening."""
    fv = free_vars(body)
    b = len(binders)
    for i, (name, m) in enumerate(binders):
        ix = b - 1 - i
        if ix not in fv and not cfg.theory.weak(m):
            raise CheckError(
                Code.WEAKENING_FORBIDDEN,
                f"variable '{name}' at mode '{m}' is never used and the mode "
                "does not admit weakening",
                rule=rule,
                payload={"name": name, "mode": m},
            )


def _gate_context(cfg: GladCheckerConfig, ctx: GladContext, t: Term) -> None:
    fv = free_vars(t)
    n = len(ctx)
    for pos, (name, _, m) in enumerate(ctx.entries):
        ix = n - 1 - pos
        if ix not in fv and not cfg.theory.weak(m):
            raise CheckError(
                Code.WEAKENING_FORBIDDEN,
                f"variable '{name}' at mode '{m}' is never used and the mode "
                "does not admit weakening",
                payload={"name": name, "mode": m},
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


# ---------------------------------------------------------------------------
# mode assignment


def mode_of_type(cfg: GladCheckerConfig, ctx: GladContext, ambient: str, ty: Term) -> str:
    """Structural mode of a type expression; falls back to the ambient.

    Mirrors the formation rules: a function or tensor type lives at the mode
    of its codomain / second component, a coproduct at the mode of its arms,
    and a type variable at its entry's mode."""
    match ty:
        case UnitIM(m):
            return m
        case ShiftUp(_, m2, _):
            return m2
        case PiG(_, m_dom, name, dom, cod):
            ext = ctx.extended(_fresh(ctx.names(), name), dom, m_dom)
            return mode_of_type(cfg, ext, ambient, cod)
        case TensorG(_, m1, name, left, right):
            ext = ctx.extended(_fresh(ctx.names(), name), left, m1)
            return mode_of_type(cfg, ext, ambient, right)
        case OplusG(left, _):
            return mode_of_type(cfg, ctx, ambient, left)
        case Var(ix):
            if 0 <= ix < len(ctx):
                return ctx.entries[len(ctx) - 1 - ix][2]
            return ambient
        case Ascribe(subject, _):
            return mode_of_type(cfg, ctx, ambient, subject)
        case _:
            return ambient


def mode_of_term(cfg: GladCheckerConfig, ctx: GladContext, ambient: str, t: Term) -> str:
    """Structural mode of a term (used to pick scrutinee modes)."""
    match t:
        case Var(ix):
            if 0 <= ix < len(ctx):
                return ctx.entries[len(ctx) - 1 - ix][2]
            return ambient
        case StarM(m):
            return m
        case AppG(fn, _):
            return mode_of_term(cfg, ctx, ambient, fn)
        case ShiftUp(_, m2, _):
            return m2
        case ShiftDown(m1, _, _):
            return m1
        case Ascribe(_, ty):
            return mode_of_type(cfg, ctx, ambient, ty)
        case _:
            return ambient


# ---------------------------------------------------------------------------
# context and type formation


def check_glad_ctx(cfg: GladCheckerConfig, delta: GradeVector, ctx: GladContext) -> Derivation:
    """Well-formedness of a mode-annotated context against a heterogeneous
    vector: lengths match, each grade inhabits its entry's mode semiring,
    names are unique, and each entry type is well formed at the entry's mode
    over its prefix."""
    if len(delta) != len(ctx):
        raise CheckError(
            Code.LENGTH_MISMATCH,
            f"vector of length {len(delta)} against a context of {len(ctx)} entries",
            payload={"vector": len(delta), "context": len(ctx)},
        )
    mt = cfg.theory
    seen: set[str] = set()
    der = Derivation("gladCtx-empty", GladCtxWF(GradeVector(()), GladContext(())))
    prefix = GladContext(())
    for i, (name, ty, m) in enumerate(ctx.entries):
        mt.mode(m)
        g = delta.entries[i]
        expected = mt.semiring_of(m)
        if g.semiring.id != expected.id:
            raise CheckError(
                Code.GRADE_MODE_MISMATCH,
                f"grade {g.value!r} of entry '{name}' lives in semiring "
                f"'{g.semiring.id}' but mode '{m}' grades in '{expected.id}'",
                payload={"position": i, "mode": m},
            )
        if name in seen:
            raise CheckError(Code.DUPLICATE_NAME, f"duplicate context name '{name}'")
        seen.add(name)
        try:
            _, wf = type_wf_glad(cfg, prefix, m, ty)
        except CheckError as e:
            raise CheckError(
                Code.TYPE_NOT_WF,
                f"type of context entry '{name}' (position {i}) is not well formed: {e.message}",
                rule=e.rule,
                payload={"position": i, "cause": e.code.value},
            ) from e
        prefix = prefix.extended(name, ty, m)
        der = Derivation(
            "gladCtx-extend",
            GladCtxWF(GradeVector(delta.entries[: i + 1]), prefix),
            (der, wf),
        )
    return der


def type_wf_glad(
    cfg: GladCheckerConfig, ctx: GladContext, mode: str, ty: Term
) -> tuple[GradeVector, Derivation]:
    """``ty`` is a type at ``mode`` over ``ctx``; synthesizes the witness
    vector.  Type formation does not gate weakening."""
    mt = cfg.theory
    mt.mode(mode)
    n = len(ctx)

    match ty:
        case TypeU():
            u = _glad_zeros(cfg, ctx)
            return u, Derivation("glad-type", GladTyping(u, ctx, mode, ty, TypeU()))
        case UnitIM(m):
            mt.mode(m)
            if m != mode:
                raise CheckError(
                    Code.MODE_VIOLATION,
                    f"the unit type at mode '{m}' used where a type at mode '{mode}' is required",
                    rule="glad-unit",
                )
            u = _glad_zeros(cfg, ctx)
            return u, Derivation("glad-unit", GladTyping(u, ctx, mode, ty, TypeU()))
        case PiG(q, m_dom, _, dom, cod):
            _check_annotation(cfg, q, m_dom, "glad-function")
            d1, p1 = type_wf_glad(cfg, ctx, m_dom, dom)
            ext = ctx.extended(_fresh(ctx.names(), ty.name), dom, m_dom)
            d2, p2 = type_wf_glad(cfg, ext, mode, cod)
            u = vec_add(d1, GradeVector(d2.entries[:-1]))
            return u, Derivation(
                "glad-function", GladTyping(u, ctx, mode, ty, TypeU()), (p1, p2), {"q": q}
            )
        case TensorG(q, m1, _, left, right):
            _check_annotation(cfg, q, m1, "glad-tensor")
            d1, p1 = type_wf_glad(cfg, ctx, m1, left)
            ext = ctx.extended(_fresh(ctx.names(), ty.name), left, m1)
            d2, p2 = type_wf_glad(cfg, ext, mode, right)
            u = vec_add(d1, GradeVector(d2.entries[:-1]))
            return u, Derivation(
                "glad-tensor", GladTyping(u, ctx, mode, ty, TypeU()), (p1, p2), {"q": q}
            )
        case OplusG(left, right):
            d1, p1 = type_wf_glad(cfg, ctx, mode, left)
            d2, p2 = type_wf_glad(cfg, ctx, mode, right)
            u = vec_add(d1, d2)
            return u, Derivation(
                "glad-coproduct", GladTyping(u, ctx, mode, ty, TypeU()), (p1, p2)
            )
        case ShiftUp(m1, m2, body):
            mt.mode(m1)
            mt.mode(m2)
            if m2 != mode:
                raise CheckError(
                    Code.MODE_VIOLATION,
                    f"a shifted type into mode '{m2}' used where a type at mode "
                    f"'{mode}' is required",
                    rule="glad-shift",
                )
            if not mode_leq(mt, m1, m2):
                raise CheckError(
                    Code.MODE_VIOLATION,
                    f"shift from mode '{m1}' into '{m2}' not along the mode order",
                    rule="glad-shift",
                )
            d1, p1 = type_wf_glad(cfg, ctx, m1, body)
            return d1, Derivation(
                "glad-shift", GladTyping(d1, ctx, mode, ty, TypeU()), (p1,)
            )
        case Ascribe(subject, _):
            return type_wf_glad(cfg, ctx, mode, subject)
        case Var(ix) if cfg.strict_types:
            if ix < 0 or ix >= n:
                raise CheckError(Code.UNBOUND_VAR, f"variable index {ix} out of range")
            entry_mode = ctx.entries[n - 1 - ix][2]
            if entry_mode != mode:
                raise CheckError(
                    Code.MODE_VIOLATION,
                    f"type variable at mode '{entry_mode}' used where a type at mode "
                    f"'{mode}' is required",
                )
            return _type_via_inference(cfg, ctx, mode, ty)
        case _:
            return _type_via_inference(cfg, ctx, mode, ty)


def _type_via_inference(
    cfg: GladCheckerConfig, ctx: GladContext, mode: str, ty: Term
) -> tuple[GradeVector, Derivation]:
    syn, der = infer_glad(cfg, ctx, mode, ty)
    universe = _whnf_glad(cfg, syn.type_, "type well-formedness")
    if not isinstance(universe, TypeU):
        raise CheckError(
            Code.NOT_A_TYPE,
            "not a type (its type is not the universe)",
            payload={"term": ty, "universe": universe},
        )
    return syn.usage, der


def _whnf_glad(cfg: GladCheckerConfig, t: Term, what: str) -> Term:
    out, exhausted = whnf(t, cfg.fuel)
    if exhausted:
        raise CheckError(
            Code.CONVERSION_INCONCLUSIVE,
            f"{what}: head normalization ran out of fuel",
            payload={"term": t},
        )
    return out


def _check_annotation(cfg: GladCheckerConfig, q: GradeValue, m: str, rule: str) -> None:
    expected = cfg.theory.semiring_of(m)
    if q.semiring.id != expected.id:
        raise CheckError(
            Code.GRADE_MODE_MISMATCH,
            f"annotation {q.value!r} lives in semiring '{q.semiring.id}' but mode "
            f"'{m}' grades in '{expected.id}'",
            rule=rule,
            payload={"mode": m},
        )


# ---------------------------------------------------------------------------
# typing


def infer_glad(
    cfg: GladCheckerConfig, ctx: GladContext, mode: str, t: Term
) -> tuple[GradeSynthesis, Derivation]:
    """Synthesize the exact heterogeneous usage vector and the type of ``t``
    at ambient mode ``mode``.  The top-level weakening gate for ambient
    hypotheses is applied by :func:`check_glad`; binder premises gate their
    own hypothesis here."""
    mt = cfg.theory
    _invariant(cfg, ctx, mode)
    n = len(ctx)

    match t:
        case Var(ix):
            if ix < 0 or ix >= n:
                raise CheckError(Code.UNBOUND_VAR, f"variable index {ix} out of range", rule="glad-var")
            pos = n - 1 - ix
            name, ty0, m_e = ctx.entries[pos]
            if m_e != mode:
                raise CheckError(
                    Code.MODE_VIOLATION,
                    f"variable '{name}' at mode '{m_e}' used in a judgment at mode '{mode}'",
                    rule="glad-var",
                    payload={"ambient": mode, "entry": m_e},
                )
            ty = shift_term(ty0, g_by=ix + 1)
            syn = GradeSynthesis(_glad_unit(cfg, ctx, pos), ty)
            return syn, Derivation("glad-var", GladTyping(syn.usage, ctx, mode, t, ty))
        case LVar(_):
            raise CheckError(Code.UNBOUND_VAR, "two-zone variable in a mode-indexed judgment", rule="glad-var")
        case StarM(m):
            mt.mode(m)
            if m != mode:
                raise CheckError(
                    Code.MODE_VIOLATION,
                    f"the unit at mode '{m}' in a judgment at mode '{mode}'",
                    rule="glad-unitIntro",
                )
            u = _glad_zeros(cfg, ctx)
            return GradeSynthesis(u, UnitIM(m)), Derivation(
                "glad-unitIntro", GladTyping(u, ctx, mode, t, UnitIM(m))
            )
        case AppG(fn, arg):
            syn1, p1 = infer_glad(cfg, ctx, mode, fn)
            head = _whnf_glad(cfg, syn1.type_, "application head")
            if not isinstance(head, PiG):
                raise _mismatch("application head", "a graded function type", head, "glad-app")
            u2, p2 = check_against_glad(cfg, ctx, head.mode, arg, head.domain)
            usage = vec_add(syn1.usage, cross_scale(mt, head.mode, head.q, _modes(ctx), u2))
            ty = subst_term(arg, 0, head.codomain)
            return GradeSynthesis(usage, ty), Derivation(
                "glad-app", GladTyping(usage, ctx, mode, t, ty), (p1, p2), {"q": head.q}
            )
        case StarElim(scrut, body):
            return _infer_star_elim(cfg, ctx, mode, t, scrut, body, goal=None)
        case PairGElim(_, _, scrut, body):
            return _infer_tensor_elim_glad(cfg, ctx, mode, t, scrut, body, goal=None)
        case CaseG(q, scrut, left, right):
            return _infer_case_glad(cfg, ctx, mode, t, q, scrut, left, right, goal=None)
        case ShiftUp(m1, m2, body):
            mt.mode(m1)
            mt.mode(m2)
            if m2 != mode:
                raise CheckError(
                    Code.MODE_VIOLATION,
                    f"raising into mode '{m2}' in a judgment at mode '{mode}'",
                    rule="glad-raise",
                )
            if not mode_leq(mt, m1, m2):
                raise CheckError(
                    Code.MODE_VIOLATION,
                    f"raise from mode '{m1}' into '{m2}' not along the mode order",
                    rule="glad-raise",
                )
            syn, p1 = infer_glad(cfg, ctx, m1, body)
            ty = ShiftUp(m1, m2, syn.type_)
            return GradeSynthesis(syn.usage, ty), Derivation(
                "glad-raise", GladTyping(syn.usage, ctx, mode, t, ty), (p1,)
            )
        case ShiftDown(m1, m2, body):
            mt.mode(m1)
            mt.mode(m2)
            if m1 != mode:
                raise CheckError(
                    Code.MODE_VIOLATION,
                    f"unraising into mode '{m1}' in a judgment at mode '{mode}'",
                    rule="glad-unraise",
                )
            syn, p1 = infer_glad(cfg, ctx, m2, body)
            head = _whnf_glad(cfg, syn.type_, "unraise subject")
            if not isinstance(head, ShiftUp) or head.mode_lo != m1 or head.mode_hi != m2:
                raise _mismatch(
                    "unraise subject", f"a type shifted from '{m1}' into '{m2}'", head, "glad-unraise"
                )
            return GradeSynthesis(syn.usage, head.body), Derivation(
                "glad-unraise", GladTyping(syn.usage, ctx, mode, t, head.body), (p1,)
            )
        case Ascribe(subject, ty):
            type_wf_glad(cfg, ctx, mode, ty)
            usage, der = check_against_glad(cfg, ctx, mode, subject, ty)
            return GradeSynthesis(usage, ty), der
        case TypeU() | UnitIM(_) | PiG() | TensorG() | OplusG():
            u, der = type_wf_glad(cfg, ctx, mode, t)
            return GradeSynthesis(u, TypeU()), der
        case LamG() | PairG() | InlG() | InrG():
            raise CheckError(
                Code.ANNOTATION_MISSING,
                f"cannot infer a type for a bare {type(t).__name__} introduction; "
                "add an ascription '(t : B)'",
                payload={"term": t},
            )
        case _:
            raise CheckError(
                Code.TYPE_MISMATCH,
                f"term {type(t).__name__} does not belong to the mode-indexed fragment",
                payload={"term": t},
            )


def _infer_star_elim(
    cfg: GladCheckerConfig,
    ctx: GladContext,
    mode: str,
    t: StarElim,
    scrut: Term,
    body: Term,
    goal: Term | None,
) -> tuple[GradeSynthesis, Derivation]:
    m_s = mode_of_term(cfg, ctx, mode, scrut)
    syn1, p1 = infer_glad(cfg, ctx, m_s, scrut)
    head = _whnf_glad(cfg, syn1.type_, "unit eliminator scrutinee")
    if not isinstance(head, UnitIM):
        raise _mismatch("unit eliminator scrutinee", "a unit type", head, "glad-unitElim")
    if goal is None:
        syn2, p2 = infer_glad(cfg, ctx, mode, body)
        u2, result_ty = syn2.usage, syn2.type_
    else:
        u2, p2 = check_against_glad(cfg, ctx, mode, body, goal)
        result_ty = goal
    usage = vec_add(syn1.usage, u2)
    return GradeSynthesis(usage, result_ty), Derivation(
        "glad-unitElim", GladTyping(usage, ctx, mode, t, result_ty), (p1, p2)
    )


def _infer_tensor_elim_glad(
    cfg: GladCheckerConfig,
    ctx: GladContext,
    mode: str,
    t: PairGElim,
    scrut: Term,
    body: Term,
    goal: Term | None,
) -> tuple[GradeSynthesis, Derivation]:
    mt = cfg.theory
    m_s = mode_of_term(cfg, ctx, mode, scrut)
    syn1, p1 = infer_glad(cfg, ctx, m_s, scrut)
    head = _whnf_glad(cfg, syn1.type_, "pair eliminator scrutinee")
    if not isinstance(head, TensorG):
        raise _mismatch("pair eliminator scrutinee", "a graded pair type", head, "glad-tensorElim")
    n1 = _fresh(ctx.names(), t.name1)
    ext1 = ctx.extended(n1, head.left, head.mode)
    ext2 = ext1.extended(_fresh(ext1.names(), t.name2), head.right, m_s)
    _gate_binders(cfg, body, ((t.name1, head.mode), (t.name2, m_s)), "glad-tensorElim")
    if goal is None:
        syn2, p2 = infer_glad(cfg, ext2, mode, body)
        u2, ty_body = syn2.usage, syn2.type_
        if free_vars(ty_body) & {0, 1}:
            raise CheckError(
                Code.ANNOTATION_MISSING,
                "the type of a pair eliminator body mentions the bound variables; "
                "ascribe the eliminator",
                rule="glad-tensorElim",
            )
        result_ty = shift_term(ty_body, g_by=-2, g_cut=2)
    else:
        u2, p2 = check_against_glad(cfg, ext2, mode, body, shift_term(goal, g_by=2))
        result_ty = goal
    g1, s = u2.entries[-2], u2.entries[-1]
    bound = mul(scale_into(mt, m_s, s, head.mode), head.q)
    if not leq(g1, bound):
        raise CheckError(
            Code.GRADE_MISMATCH,
            "pair eliminator binder grades do not fit the annotation "
            f"(first component used {g1.value!r}, allowed {bound.value!r})",
            rule="glad-tensorElim",
            payload={"q": head.q, "s": s, "g1": g1},
        )
    usage = vec_add(
        cross_scale(mt, m_s, s, _modes(ctx), syn1.usage), GradeVector(u2.entries[:-2])
    )
    return GradeSynthesis(usage, result_ty), Derivation(
        "glad-tensorElim",
        GladTyping(usage, ctx, mode, t, result_ty),
        (p1, p2),
        {"q": head.q, "s": s},
    )


def _infer_case_glad(
    cfg: GladCheckerConfig,
    ctx: GladContext,
    mode: str,
    t: CaseG,
    q: GradeValue,
    scrut: Term,
    left: Term,
    right: Term,
    goal: Term | None,
) -> tuple[GradeSynthesis, Derivation]:
    mt = cfg.theory
    m_s = mode_of_term(cfg, ctx, mode, scrut)
    _check_annotation(cfg, q, m_s, "glad-coproductElim")
    s_ring = mt.semiring_of(m_s)
    if not leq(one(s_ring), q):
        raise CheckError(
            Code.GRADE_MISMATCH,
            f"case annotation must satisfy 1 <= q; got {q.value!r}",
            rule="glad-coproductElim",
            payload={"q": q},
        )
    syn1, p1 = infer_glad(cfg, ctx, m_s, scrut)
    head = _whnf_glad(cfg, syn1.type_, "case scrutinee")
    if not isinstance(head, OplusG):
        raise _mismatch("case scrutinee", "a coproduct type", head, "glad-coproductElim")
    if goal is not None:
        shifted = shift_term(goal, g_by=1)
        ty_l = PiG(q, m_s, "x", head.left, shifted)
        ty_r = PiG(q, m_s, "x", head.right, shifted)
        u_l, p2 = check_against_glad(cfg, ctx, mode, left, ty_l)
        u_r, p3 = check_against_glad(cfg, ctx, mode, right, ty_r)
        bty_l, bty_r = ty_l, ty_r
        result_ty = goal
    else:
        syn_l, p2 = infer_glad(cfg, ctx, mode, left)
        syn_r, p3 = infer_glad(cfg, ctx, mode, right)
        head_l = _whnf_glad(cfg, syn_l.type_, "case left branch")
        head_r = _whnf_glad(cfg, syn_r.type_, "case right branch")
        if not isinstance(head_l, PiG) or not isinstance(head_r, PiG):
            raise CheckError(
                Code.TYPE_MISMATCH,
                "case branches must be functions from the injected components",
                rule="glad-coproductElim",
            )
        if head_l.q != q or head_r.q != q or head_l.mode != m_s or head_r.mode != m_s:
            raise CheckError(
                Code.GRADE_MISMATCH,
                "case branch annotations must match the case grade and scrutinee mode",
                rule="glad-coproductElim",
            )
        _conv_glad(cfg, head_l.domain, head.left, "left branch domain", "glad-coproductElim")
        _conv_glad(cfg, head_r.domain, head.right, "right branch domain", "glad-coproductElim")
        if 0 in free_vars(head_l.codomain) or 0 in free_vars(head_r.codomain):
            raise CheckError(
                Code.ANNOTATION_MISSING,
                "case branch result types mention the bound variable; ascribe the case",
                rule="glad-coproductElim",
            )
        cod_l = shift_term(head_l.codomain, g_by=-1, g_cut=1)
        cod_r = shift_term(head_r.codomain, g_by=-1, g_cut=1)
        _conv_glad(cfg, cod_l, cod_r, "case branch result types", "glad-coproductElim")
        u_l, u_r = syn_l.usage, syn_r.usage
        bty_l, bty_r = syn_l.type_, syn_r.type_
        result_ty = cod_l
    u_branches = _branch_join(u_l, u_r, "glad-coproductElim")
    # Weakening a branch to the join is a genuine subusage step; record it so
    # exactness analyses can see that the joined vector is not branch-exact.
    if u_l != u_branches:
        p2 = Derivation(
            "glad-subusage",
            GladTyping(u_branches, ctx, mode, left, bty_l),
            (p2,),
            {"synthesized": u_l},
        )
    if u_r != u_branches:
        p3 = Derivation(
            "glad-subusage",
            GladTyping(u_branches, ctx, mode, right, bty_r),
            (p3,),
            {"synthesized": u_r},
        )
    usage = vec_add(cross_scale(mt, m_s, q, _modes(ctx), syn1.usage), u_branches)
    return GradeSynthesis(usage, result_ty), Derivation(
        "glad-coproductElim",
        GladTyping(usage, ctx, mode, t, result_ty),
        (p1, p2, p3),
        {"q": q, "join": u_branches},
    )


def _conv_glad(cfg: GladCheckerConfig, actual: Term, expected: Term, what: str, rule: str | None = None) -> None:
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


def check_against_glad(
    cfg: GladCheckerConfig, ctx: GladContext, mode: str, t: Term, expected: Term
) -> tuple[GradeVector, Derivation]:
    """Bidirectional mode-indexed checking against a goal type."""
    mt = cfg.theory
    match t:
        case LamG(_, body):
            head = _whnf_glad(cfg, expected, "lambda goal")
            if not isinstance(head, PiG):
                raise _mismatch("lambda", "a graded function type", head, "glad-lambda")
            name = _fresh(ctx.names(), t.name)
            ext = ctx.extended(name, head.domain, head.mode)
            _gate_binders(cfg, body, ((name, head.mode),), "glad-lambda")
            u_ext, p1 = check_against_glad(cfg, ext, mode, body, head.codomain)
            g = u_ext.entries[-1]
            if not leq(g, head.q):
                raise CheckError(
                    Code.GRADE_MISMATCH,
                    f"lambda binder used {g.value!r}, annotated {head.q.value!r}",
                    rule="glad-lambda",
                    payload={"used": g, "annotated": head.q},
                )
            usage = GradeVector(u_ext.entries[:-1])
            return usage, Derivation(
                "glad-lambda",
                GladTyping(usage, ctx, mode, t, head),
                (p1,),
                {"q": head.q, "binder_usage": g},
            )
        case PairG(left, right):
            head = _whnf_glad(cfg, expected, "pair goal")
            if not isinstance(head, TensorG):
                raise _mismatch("pair", "a graded pair type", head, "glad-tensorIntro")
            u1, p1 = check_against_glad(cfg, ctx, head.mode, left, head.left)
            u2, p2 = check_against_glad(cfg, ctx, mode, right, subst_term(left, 0, head.right))
            usage = vec_add(cross_scale(mt, head.mode, head.q, _modes(ctx), u1), u2)
            return usage, Derivation(
                "glad-tensorIntro",
                GladTyping(usage, ctx, mode, t, head),
                (p1, p2),
                {"q": head.q},
            )
        case InlG(body):
            head = _whnf_glad(cfg, expected, "left injection goal")
            if not isinstance(head, OplusG):
                raise _mismatch("left injection", "a coproduct type", head, "glad-coproductInl")
            u, p1 = check_against_glad(cfg, ctx, mode, body, head.left)
            return u, Derivation("glad-coproductInl", GladTyping(u, ctx, mode, t, head), (p1,))
        case InrG(body):
            head = _whnf_glad(cfg, expected, "right injection goal")
            if not isinstance(head, OplusG):
                raise _mismatch("right injection", "a coproduct type", head, "glad-coproductInr")
            u, p1 = check_against_glad(cfg, ctx, mode, body, head.right)
            return u, Derivation("glad-coproductInr", GladTyping(u, ctx, mode, t, head), (p1,))
        case ShiftUp(m1, m2, body):
            head = _whnf_glad(cfg, expected, "raise goal")
            if not isinstance(head, ShiftUp) or head.mode_lo != m1 or head.mode_hi != m2:
                raise _mismatch("raise", f"a type shifted from '{m1}' into '{m2}'", head, "glad-raise")
            if m2 != mode:
                raise CheckError(
                    Code.MODE_VIOLATION,
                    f"raising into mode '{m2}' in a judgment at mode '{mode}'",
                    rule="glad-raise",
                )
            if not mode_leq(mt, m1, m2):
                raise CheckError(
                    Code.MODE_VIOLATION,
                    f"raise from mode '{m1}' into '{m2}' not along the mode order",
                    rule="glad-raise",
                )
            u, p1 = check_against_glad(cfg, ctx, m1, body, head.body)
            return u, Derivation("glad-raise", GladTyping(u, ctx, mode, t, head), (p1,))
        case StarElim(scrut, body):
            syn, der = _infer_star_elim(cfg, ctx, mode, t, scrut, body, goal=expected)
            return syn.usage, der
        case PairGElim(_, _, scrut, body):
            syn, der = _infer_tensor_elim_glad(cfg, ctx, mode, t, scrut, body, goal=expected)
            return syn.usage, der
        case CaseG(q, scrut, left, right):
            syn, der = _infer_case_glad(cfg, ctx, mode, t, q, scrut, left, right, goal=expected)
            return syn.usage, der
        case Ascribe(subject, ty):
            syn, der = infer_glad(cfg, ctx, mode, t)
            _conv_glad(cfg, ty, expected, "ascription against the goal type")
            return syn.usage, der
        case _:
            syn, der = infer_glad(cfg, ctx, mode, t)
            if alpha_eq(syn.type_, expected):
                return syn.usage, der
            _conv_glad(cfg, syn.type_, expected, "synthesized type against the goal", "glad-convert")
            d0, _wf = type_wf_glad(cfg, ctx, mode, expected)
            return syn.usage, Derivation(
                "glad-convert",
                GladTyping(syn.usage, ctx, mode, t, expected),
                (der,),
                {"delta0": d0},
            )


def check_glad(
    cfg: GladCheckerConfig,
    delta: GradeVector,
    ctx: GladContext,
    mode: str,
    t: Term,
    expected: Term,
) -> Derivation:
    """Full mode-indexed check: context, goal type at the ambient mode, the
    weakening gate for unused hypotheses, synthesis, and the single trailing
    subusage comparison against the declared vector."""
    check_glad_ctx(cfg, delta, ctx)
    type_wf_glad(cfg, ctx, mode, expected)
    _gate_context(cfg, ctx, t)
    usage, der = check_against_glad(cfg, ctx, mode, t, expected)
    if usage == delta:
        return der
    if not vec_leq(usage, delta):
        raise CheckError(
            Code.SUBUSAGE_FAILED,
            "synthesized usage is not below the declared vector",
            rule="glad-subusage",
            payload={"synthesized": usage, "declared": delta},
        )
    return Derivation(
        "glad-subusage",
        GladTyping(delta, ctx, mode, t, expected),
        (der,),
        {"synthesized": usage},
    )
