"""Executable metatheory: random well-typed judgments and checked transforms.

The generator proposes, the checker disposes.  Terms are built synthesis-style
(annotations are computed from the usage the checker's arithmetic will derive,
so exact-fit grades work even over semirings whose order is equality), and
every candidate judgment is re-checked through the public checker before it is
emitted; a candidate the checker rejects is discarded and regenerated, and a
stream that cannot produce a candidate within its retry budget raises
``GenerationExhausted``.  Everything is driven by ``random.Random(seed)``, so
a suite run is a pure function of its seed and configuration.

The transforms implement the structural properties as executable checks:

* substitution: cut out a hypothesis, splice in a derivation for it, predict
  the resulting vector by the rules' arithmetic and require the checker to
  accept it — and to reproduce it exactly whenever the input derivations
  contain no subusage nodes (a coproduct branch join is itself a subusage
  step, and only across such a join may the re-synthesized vector sit
  strictly below the prediction);
* contraction: merge two adjacent hypotheses of the same type (and mode) by
  adding their grades and identifying the variables;
* shifting a trailing linear hypothesis into the graded zone behind the
  right adjoint, consuming it through the adjoint's counit at grade one;
* subject reduction: reduce at every redex position and re-check against the
  unchanged vector and type;
* inversion: introduction judgments decompose into component judgments whose
  recombination stays below the declared vector;
* context/vector independence: context well-formedness only reads the
  vector's length, never its values.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Callable, Iterable

from .errors import CheckError, Code
from .dmgl import (
    CheckerConfig,
    Derivation,
    check_against_graded,
    check_against_mixed,
    check_graded,
    check_graded_ctx,
    check_mixed,
    infer_graded,
    infer_mixed,
)
from .glad import GladCheckerConfig, check_against_glad, check_glad, infer_glad
from .modes import ModeTheory, cross_scale, mode_leq
from .reduction import normalize, root_step
from .semiring import (
    GradeValue,
    GradeVector,
    SemiringSpec,
    add,
    leq,
    mul,
    one,
    vec,
    vec_add,
    vec_leq,
    vec_scale,
    zero,
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
    GWrap,
    ILin,
    Inl,
    Inr,
    Lam,
    LamLin,
    LinearContext,
    Lollipop,
    LVar,
    Pair,
    PairElim,
    Tensor,
    TensorElim,
    TensorPair,
    Term,
    UnitI,
    UnitIElim,
    UnitJ,
    UnitJElim,
    UnitJType,
    AppLin,
    TypeU,
    Var,
    Zone,
    alpha_eq,
    children_spec,
    free_vars,
    shift_term,
    subst_graded_suffix,
    subst_term,
    transform_vars,
)
from .syntax import (
    AppG,
    CaseG,
    GladContext,
    GladTyping,
    InlG,
    InrG,
    LamG,
    OplusG,
    PairG,
    PairGElim,
    PiG,
    ShiftDown,
    ShiftUp,
    StarElim,
    StarM,
    TensorG,
    UnitIM,
)

RETRY_BUDGET = 200


class _Retry(Exception):
    """Internal: abandon the current candidate and try again."""


def _exhausted(what: str) -> CheckError:
    return CheckError(
        Code.GENERATION_EXHAUSTED,
        f"could not generate {what} within {RETRY_BUDGET} attempts",
    )


# ---------------------------------------------------------------------------
# judgment cases


@dataclass(frozen=True)
class GradedCase:
    delta: GradeVector
    ctx: GradedContext
    term: Term
    type_: Term
    has_subusage: bool = False


@dataclass(frozen=True)
class MixedCase:
    delta: GradeVector
    gctx: GradedContext
    lctx: LinearContext
    term: Term
    type_: Term
    has_subusage: bool = False


@dataclass(frozen=True)
class GladCase:
    delta: GradeVector
    ctx: GladContext
    mode: str
    term: Term
    type_: Term
    has_subusage: bool = False


_SUBUSAGE_RULES = frozenset({"G-subusage", "M-subusage", "glad-subusage"})


def derivation_has_subusage(der: Derivation) -> bool:
    """Whether any node of the derivation weakens a synthesized vector.

    Grade arithmetic of the transforms is exact only for derivations without
    such nodes; branch joins of a coproduct eliminator introduce them whenever
    the two branch usages differ."""
    if der.rule in _SUBUSAGE_RULES:
        return True
    return any(derivation_has_subusage(p) for p in der.premises)


# ---------------------------------------------------------------------------
# linear index embedding (inverse of the checker's zone narrowing)


def embed_linear(t: Term, positions: list[int], full_len: int, bound: int = 0) -> Term:
    """Renumber ambient linear variables of a term written over the sub-zone
    at sorted absolute ``positions`` so they point into the full zone."""
    m = len(positions)

    def on_lvar(ix: int, gd: int, ld: int) -> Term:
        if ix < ld + bound:
            return LVar(ix)
        j = ix - ld - bound
        p = positions[m - 1 - j]
        return LVar(full_len - 1 - p + ld + bound)

    return transform_vars(t, lambda ix, gd, ld: Var(ix), on_lvar)


# ---------------------------------------------------------------------------
# graded-fragment generation


class GradedGen:
    """Synthesis-style generator for graded judgments."""

    def __init__(self, cfg: CheckerConfig, rng: random.Random, max_depth: int = 3) -> None:
        self.cfg = cfg
        self.rng = rng
        self.max_depth = max_depth
        self.grades = [GradeValue(cfg.semiring, v) for v in cfg.semiring.elements(bound=3)]

    def grade(self) -> GradeValue:
        return self.rng.choice(self.grades)

    def safe_grade(self) -> GradeValue:
        """A grade that sits above both zero and one when the order has such
        an element; annotation choices that rarely force a retry."""
        s = self.cfg.semiring
        generous = [g for g in self.grades if leq(zero(s), g) and leq(one(s), g)]
        if generous:
            return self.rng.choice(generous)
        above_zero = [g for g in self.grades if leq(zero(s), g)]
        if above_zero:
            return self.rng.choice(above_zero)
        return self.grade()

    def fresh(self, ctx_names: tuple[str, ...], base: str) -> str:
        k = 0
        cand = base
        while cand in ctx_names:
            k += 1
            cand = f"{base}{k}"
        return cand

    # types ---------------------------------------------------------------

    def gen_type(self, ctx: GradedContext, depth: int) -> Term:
        opts = ["unit"]
        tyvars = [
            len(ctx) - 1 - pos
            for pos, (_, ty) in enumerate(ctx.entries)
            if isinstance(ty, TypeU)
        ]
        if tyvars:
            opts.append("var")
        if depth > 0:
            opts += ["pair", "sum", "fn"]
        match self.rng.choice(opts):
            case "unit":
                return UnitJType()
            case "var":
                return Var(self.rng.choice(tyvars))
            case "pair":
                left = self.gen_type(ctx, depth - 1)
                right = self.gen_type(ctx, depth - 1)
                return BoxTimes(self.grade(), "_", left, shift_term(right, g_by=1))
            case "sum":
                return BoxPlus(self.gen_type(ctx, depth - 1), self.gen_type(ctx, depth - 1))
            case _:
                dom = self.gen_type(ctx, depth - 1)
                cod = self.gen_type(ctx, depth - 1)
                return GradedArrow(self.grade(), "_", dom, shift_term(cod, g_by=1))

    def gen_ctx(self, depth: int, min_len: int = 0) -> GradedContext:
        n = self.rng.randint(min_len, max(min_len, 3))
        ctx = GradedContext(())
        for i in range(n):
            name = f"x{i}"
            ty = TypeU() if self.rng.random() < 0.25 else self.gen_type(ctx, depth - 1)
            ctx = ctx.extended(name, ty)
        return ctx

    # terms ---------------------------------------------------------------

    def gen_synth(self, ctx: GradedContext, depth: int) -> tuple[Term, Term]:
        """A term and its type, both over ``ctx``.  Annotations are exact-fit
        so the candidate is well typed by construction; callers re-check."""
        n = len(ctx)
        opts = ["unitJ"]
        usable = [
            ix
            for ix in range(n)
            if not isinstance(ctx.entries[n - 1 - ix][1], TypeU)
        ]
        if usable:
            opts += ["var", "var", "var"]
        if depth > 0:
            opts += ["lam", "pair", "inl", "inr", "unit_elim", "redex", "wrap", "pair_elim", "case"]
        match self.rng.choice(opts):
            case "unitJ":
                return UnitJ(), UnitJType()
            case "var":
                ix = self.rng.choice(usable)
                return Var(ix), shift_term(ctx.entries[n - 1 - ix][1], g_by=ix + 1)
            case "lam":
                dom = self.gen_type(ctx, depth - 1)
                name = self.fresh(ctx.names(), "a")
                ext = ctx.extended(name, dom)
                body, body_ty = self.gen_synth(ext, depth - 1)
                syn, _ = infer_graded(self.cfg, ext, body)
                r = syn.usage.entries[-1]
                ty = GradedArrow(r, name, dom, body_ty)
                return Ascribe(Lam(name, body), ty), ty
            case "pair":
                left, lty = self.gen_synth(ctx, depth - 1)
                right, rty = self.gen_synth(ctx, depth - 1)
                ty = BoxTimes(self.grade(), "_", lty, shift_term(rty, g_by=1))
                return Ascribe(Pair(left, right), ty), ty
            case "inl":
                body, bty = self.gen_synth(ctx, depth - 1)
                ty = BoxPlus(bty, self.gen_type(ctx, depth - 1))
                return Ascribe(Inl(body), ty), ty
            case "inr":
                body, bty = self.gen_synth(ctx, depth - 1)
                ty = BoxPlus(self.gen_type(ctx, depth - 1), bty)
                return Ascribe(Inr(body), ty), ty
            case "unit_elim":
                scrut = self.gen_of_type(ctx, UnitJType(), depth - 1)
                body, bty = self.gen_synth(ctx, depth - 1)
                return UnitJElim(scrut, body), bty
            case "redex":
                inner, ity = self.gen_synth(ctx, depth - 1)
                return self.identity_redex(ctx, inner, ity), ity
            case "pair_elim":
                left, lty = self.gen_synth(ctx, depth - 1)
                right, rty = self.gen_synth(ctx, depth - 1)
                r = self.safe_grade()
                scrut_ty = BoxTimes(r, "_", lty, shift_term(rty, g_by=1))
                scrut = Ascribe(Pair(left, right), scrut_ty)
                na = self.fresh(ctx.names(), "p")
                ext = ctx.extended(na, lty)
                nb = self.fresh(ext.names(), "q")
                ext = ext.extended(nb, shift_term(rty, g_by=1))
                body, body_ty = self.gen_synth(ext, depth - 1)
                if free_vars(body_ty) & {0, 1}:
                    raise _Retry()
                return (
                    PairElim(na, nb, scrut, body),
                    shift_term(body_ty, g_by=-2, g_cut=2),
                )
            case "case":
                inj, t1 = self.gen_synth(ctx, depth - 1)
                t2 = self.gen_type(ctx, depth - 1)
                q = self.safe_grade()
                s = self.cfg.semiring
                if not leq(one(s), q):
                    raise _Retry()
                use_left = self.rng.random() < 0.5
                scrut_ty = BoxPlus(t1, t2) if use_left else BoxPlus(t2, t1)
                scrut = Ascribe(Inl(inj) if use_left else Inr(inj), scrut_ty)
                body, cod = self.gen_synth(ctx, depth - 1)
                other = self.gen_of_type(ctx, cod, 1)
                shifted_cod = shift_term(cod, g_by=1)
                mk = lambda dom, b: Ascribe(
                    Lam("c", shift_term(b, g_by=1)), GradedArrow(q, "c", dom, shifted_cod)
                )
                left_b = mk(scrut_ty.left, body if use_left else other)
                right_b = mk(scrut_ty.right, other if use_left else body)
                return Case(q, scrut, left_b, right_b), cod
            case _:
                body = self.gen_mixed_closed(ctx, depth - 1)
                syn, _ = infer_mixed(self.cfg, ctx, LinearContext(()), body)
                return GWrap(body), GAdj(syn.type_)

    def identity_redex(self, ctx: GradedContext, inner: Term, ity: Term) -> Term:
        """Wrap ``inner : ity`` in an application of an ascribed identity."""
        name = self.fresh(ctx.names(), "z")
        fn_ty = GradedArrow(one(self.cfg.semiring), name, ity, shift_term(ity, g_by=1))
        return App(Ascribe(Lam(name, Var(0)), fn_ty), inner)

    def gen_of_type(self, ctx: GradedContext, ty: Term, depth: int) -> Term:
        """A term checkable against ``ty``; raises ``_Retry`` when this
        attempt cannot hit the goal."""
        n = len(ctx)
        candidates = [
            ix
            for ix in range(n)
            if alpha_eq(shift_term(ctx.entries[n - 1 - ix][1], g_by=ix + 1), ty)
        ]
        if candidates and (depth == 0 or self.rng.random() < 0.4):
            return Var(self.rng.choice(candidates))
        match ty:
            case UnitJType():
                if depth > 0 and self.rng.random() < 0.3:
                    return UnitJElim(self.gen_of_type(ctx, UnitJType(), depth - 1), UnitJ())
                return UnitJ()
            case BoxTimes(_, _, left, right):
                l = self.gen_of_type(ctx, left, depth - 1) if depth > 0 else self._atom(ctx, left)
                r = self.gen_of_type(ctx, subst_term(l, 0, right), depth - 1) if depth > 0 else self._atom(ctx, subst_term(l, 0, right))
                return Ascribe(Pair(l, r), ty)
            case BoxPlus(left, right):
                if self.rng.random() < 0.5:
                    return Ascribe(Inl(self._descend(ctx, left, depth)), ty)
                return Ascribe(Inr(self._descend(ctx, right, depth)), ty)
            case GradedArrow(r, name, dom, cod):
                nm = self.fresh(ctx.names(), name if name != "_" else "a")
                ext = ctx.extended(nm, dom)
                body = self._descend(ext, cod, depth)
                syn, _ = infer_graded(self.cfg, ext, Ascribe(body, cod) if not _inferable(body) else body)
                if not leq(syn.usage.entries[-1], r):
                    raise _Retry()
                return Ascribe(Lam(nm, body), ty)
            case GAdj(inner):
                mixed = MixedGen(self.cfg, self.rng, self.max_depth)
                body = mixed.gen_consume(ctx, [], inner, depth)
                return GWrap(body)
            case Var(_) if candidates:
                return Var(self.rng.choice(candidates))
            case _:
                raise _Retry()

    def _descend(self, ctx: GradedContext, ty: Term, depth: int) -> Term:
        return self.gen_of_type(ctx, ty, depth - 1) if depth > 0 else self._atom(ctx, ty)

    def _atom(self, ctx: GradedContext, ty: Term) -> Term:
        n = len(ctx)
        candidates = [
            ix
            for ix in range(n)
            if alpha_eq(shift_term(ctx.entries[n - 1 - ix][1], g_by=ix + 1), ty)
        ]
        if candidates:
            return Var(self.rng.choice(candidates))
        if isinstance(ty, UnitJType):
            return UnitJ()
        raise _Retry()

    def gen_mixed_closed(self, gctx: GradedContext, depth: int) -> Term:
        mixed = MixedGen(self.cfg, self.rng, self.max_depth)
        ty = mixed.gen_linear_type(gctx, max(depth - 1, 0))
        return mixed.gen_consume(gctx, [], ty, depth)


def _inferable(t: Term) -> bool:
    return not isinstance(t, (Lam, Pair, Inl, Inr, LamLin, FPair, LamG, PairG, InlG, InrG))


# ---------------------------------------------------------------------------
# mixed-fragment generation


class MixedGen:
    """Generator for mixed judgments: builds terms consuming a given linear
    zone exactly once while producing a requested linear type."""

    def __init__(self, cfg: CheckerConfig, rng: random.Random, max_depth: int = 3) -> None:
        self.cfg = cfg
        self.rng = rng
        self.max_depth = max_depth
        self.graded = GradedGen(cfg, rng, max_depth)
        self._binders = 0

    def _binder(self, base: str) -> str:
        self._binders += 1
        return f"{base}{self._binders}"

    def gen_linear_type(self, gctx: GradedContext, depth: int) -> Term:
        opts = ["unit"]
        if depth > 0:
            opts += ["tensor", "ladj", "fn"]
        match self.rng.choice(opts):
            case "unit":
                return ILin()
            case "tensor":
                return Tensor(
                    self.gen_linear_type(gctx, depth - 1), self.gen_linear_type(gctx, depth - 1)
                )
            case "ladj":
                dom = self.graded.gen_type(gctx, depth - 1)
                body = self.gen_linear_type(gctx, depth - 1)
                return FAdj(self.graded.safe_grade(), "_", dom, shift_term(body, g_by=1))
            case _:
                return Lollipop(
                    self.gen_linear_type(gctx, depth - 1), self.gen_linear_type(gctx, depth - 1)
                )

    def gen_zone_entry_type(self, gctx: GradedContext, depth: int) -> Term:
        """Zone entries stick to consumable shapes."""
        opts = ["unit"]
        if depth > 0:
            opts += ["tensor", "ladj"]
        match self.rng.choice(opts):
            case "unit":
                return ILin()
            case "tensor":
                return Tensor(
                    self.gen_zone_entry_type(gctx, depth - 1),
                    self.gen_zone_entry_type(gctx, depth - 1),
                )
            case _:
                dom = UnitJType()
                body = self.gen_zone_entry_type(gctx, depth - 1)
                return FAdj(self.graded.safe_grade(), "_", dom, shift_term(body, g_by=1))

    def gen_zone(self, gctx: GradedContext, depth: int, min_len: int = 0) -> LinearContext:
        n = self.rng.randint(min_len, max(min_len, 2))
        entries = tuple(
            (f"u{i}", self.gen_zone_entry_type(gctx, depth - 1)) for i in range(n)
        )
        return LinearContext(entries)

    def gen_consume(
        self, gctx: GradedContext, zone: list[tuple[str, Term]], ty: Term, depth: int
    ) -> Term:
        """A term over the given zone (entries oldest first), consuming every
        entry exactly once, checkable against linear type ``ty``."""
        n = len(zone)
        if n == 1 and alpha_eq(zone[0][1], ty) and (depth == 0 or self.rng.random() < 0.4):
            return LVar(0)
        if n > 0:
            # eliminate one zone entry outward, then recurse
            pos = self.rng.randrange(n)
            name, ety = zone[pos]
            rest = [e for i, e in enumerate(zone) if i != pos]
            rest_pos = sorted(p for p in range(n) if p != pos)
            scrut = LVar(n - 1 - pos)
            match ety:
                case ILin():
                    body = self.gen_consume(gctx, rest, ty, depth)
                    return UnitIElim(scrut, embed_linear(body, rest_pos, n, bound=0))
                case Tensor(a, b):
                    zone2 = rest + [(f"{name}l", a), (f"{name}r", b)]
                    body = self.gen_consume(gctx, zone2, ty, depth)
                    inner = embed_linear(body, rest_pos, n, bound=2)
                    return TensorElim(f"{name}l", f"{name}r", scrut, inner)
                case FAdj(_, gname, dom, lbody):
                    gname = self.graded.fresh(gctx.names(), "g")
                    gext = gctx.extended(gname, dom)
                    rest2 = [(nm, shift_term(t2, g_by=1)) for nm, t2 in rest]
                    zone2 = rest2 + [(f"{name}v", lbody)]
                    body = self.gen_consume(gext, zone2, shift_term(ty, g_by=1), depth)
                    inner = embed_linear(body, rest_pos, n, bound=1)
                    return FElim(gname, f"{name}v", scrut, inner)
                case _:
                    raise _Retry()
        # empty zone: introduce the goal
        if depth > 0 and self.rng.random() < 0.25:
            # identity redex at linear type
            inner = self.gen_consume(gctx, zone, ty, depth - 1)
            nm = self._binder("v")
            return AppLin(Ascribe(LamLin(nm, LVar(0)), Lollipop(ty, ty)), inner)
        match ty:
            case ILin():
                if depth > 0 and self.rng.random() < 0.2:
                    return GInv(Ascribe(GWrap(UnitI()), GAdj(ILin())))
                return UnitI()
            case Tensor(a, b):
                return TensorPair(
                    self.gen_consume(gctx, [], a, max(depth - 1, 0)),
                    self.gen_consume(gctx, [], b, max(depth - 1, 0)),
                )
            case FAdj(_, _, dom, lbody):
                for _ in range(8):
                    try:
                        g = self.graded.gen_of_type(gctx, dom, max(depth - 1, 0))
                        break
                    except _Retry:
                        continue
                else:
                    raise _Retry()
                part = self.gen_consume(gctx, [], subst_term(g, 0, lbody), max(depth - 1, 0))
                return Ascribe(FPair(g, part), ty)
            case Lollipop(a, b):
                nm = self._binder("w")
                body = self.gen_consume(gctx, [(nm, a)], b, max(depth - 1, 0))
                return Ascribe(LamLin(nm, body), ty)
            case GAdj(_):
                raise _Retry()
            case _:
                raise _Retry()


# ---------------------------------------------------------------------------
# glad generation


class GladGen:
    """Synthesis-style generator for mode-indexed judgments."""

    def __init__(self, cfg: GladCheckerConfig, rng: random.Random, max_depth: int = 3) -> None:
        self.cfg = cfg
        self.rng = rng
        self.max_depth = max_depth
        self.mode_ids = sorted(cfg.theory.modes)

    def grade(self, mode: str) -> GradeValue:
        s = self.cfg.theory.semiring_of(mode)
        return GradeValue(s, self.rng.choice(s.elements(bound=3)))

    def safe_grade(self, mode: str) -> GradeValue:
        s = self.cfg.theory.semiring_of(mode)
        grades = [GradeValue(s, v) for v in s.elements(bound=3)]
        generous = [g for g in grades if leq(zero(s), g) and leq(one(s), g)]
        if generous:
            return self.rng.choice(generous)
        above_zero = [g for g in grades if leq(zero(s), g)]
        if above_zero:
            return self.rng.choice(above_zero)
        return self.rng.choice(grades)

    def uppers(self, mode: str) -> list[str]:
        return [m for m in self.mode_ids if mode_leq(self.cfg.theory, mode, m)]

    def lowers(self, mode: str) -> list[str]:
        return [m for m in self.mode_ids if mode_leq(self.cfg.theory, m, mode)]

    def gen_type(self, ctx: GladContext, mode: str, depth: int) -> Term:
        opts = ["unit"]
        if depth > 0:
            opts += ["fn", "tensor", "sum", "shift"]
        match self.rng.choice(opts):
            case "unit":
                return UnitIM(mode)
            case "fn":
                m1 = self.rng.choice(self.mode_ids)
                dom = self.gen_type(ctx, m1, depth - 1)
                cod = self.gen_type(ctx, mode, depth - 1)
                return PiG(self.grade(m1), m1, "_", dom, shift_term(cod, g_by=1))
            case "tensor":
                m1 = self.rng.choice(self.mode_ids)
                left = self.gen_type(ctx, m1, depth - 1)
                right = self.gen_type(ctx, mode, depth - 1)
                return TensorG(self.grade(m1), m1, "_", left, shift_term(right, g_by=1))
            case "sum":
                return OplusG(
                    self.gen_type(ctx, mode, depth - 1), self.gen_type(ctx, mode, depth - 1)
                )
            case _:
                m1 = self.rng.choice(self.lowers(mode))
                return ShiftUp(m1, mode, self.gen_type(ctx, m1, depth - 1))

    def gen_ctx(self, ambient: str, depth: int, min_len: int = 0) -> GladContext:
        n = self.rng.randint(min_len, max(min_len, 3))
        ctx = GladContext(())
        ups = self.uppers(ambient)
        for i in range(n):
            m = self.rng.choice(ups)
            ty = self.gen_type(ctx, m, depth - 1)
            ctx = ctx.extended(f"x{i}", ty, m)
        return ctx

    def gen_synth(self, ctx: GladContext, mode: str, depth: int) -> tuple[Term, Term]:
        n = len(ctx)
        usable = [ix for ix in range(n) if ctx.entries[n - 1 - ix][2] == mode]
        opts = ["star"]
        if usable:
            opts += ["var", "var", "var"]
        if depth > 0:
            opts += ["lam", "pair", "inl", "unit_elim", "raise", "redex"]
        match self.rng.choice(opts):
            case "star":
                return StarM(mode), UnitIM(mode)
            case "var":
                ix = self.rng.choice(usable)
                return Var(ix), shift_term(ctx.entries[n - 1 - ix][1], g_by=ix + 1)
            case "lam":
                m1 = self.rng.choice(self.mode_ids)
                if not mode_leq(self.cfg.theory, mode, m1):
                    raise _Retry()
                dom = self.gen_type(ctx, m1, depth - 1)
                name = f"a{n}"
                ext = ctx.extended(name, dom, m1)
                body, body_ty = self.gen_synth(ext, mode, depth - 1)
                if 0 not in free_vars(body) and not self.cfg.theory.weak(m1):
                    raise _Retry()
                syn, _ = infer_glad(self.cfg, ext, mode, body)
                q = syn.usage.entries[-1]
                ty = PiG(q, m1, name, dom, body_ty)
                return Ascribe(LamG(name, body), ty), ty
            case "pair":
                m1 = self.rng.choice(self.mode_ids)
                left, lty = self.gen_synth_at(ctx, m1, depth - 1)
                right, rty = self.gen_synth(ctx, mode, depth - 1)
                ty = TensorG(self.grade(m1), m1, "_", lty, shift_term(rty, g_by=1))
                return Ascribe(PairG(left, right), ty), ty
            case "inl":
                body, bty = self.gen_synth(ctx, mode, depth - 1)
                other = self.gen_type(ctx, mode, depth - 1)
                if self.rng.random() < 0.5:
                    ty = OplusG(bty, other)
                    return Ascribe(InlG(body), ty), ty
                ty = OplusG(other, bty)
                return Ascribe(InrG(body), ty), ty
            case "unit_elim":
                m_s = self.rng.choice(self.uppers(mode))
                scrut, sty = self.gen_synth_at(ctx, m_s, 0)
                if not alpha_eq(sty, UnitIM(m_s)):
                    scrut = StarM(m_s)
                body, bty = self.gen_synth(ctx, mode, depth - 1)
                return StarElim(scrut, body), bty
            case "raise":
                m1 = self.rng.choice(self.lowers(mode))
                inner, ity = self.gen_synth_at(ctx, m1, depth - 1)
                return ShiftUp(m1, mode, inner), ShiftUp(m1, mode, ity)
            case _:
                inner, ity = self.gen_synth(ctx, mode, depth - 1)
                s = self.cfg.theory.semiring_of(mode)
                name = f"z{len(ctx)}"
                fn_ty = PiG(one(s), mode, name, ity, shift_term(ity, g_by=1))
                return AppG(Ascribe(LamG(name, Var(0)), fn_ty), inner), ity

    def gen_synth_at(self, ctx: GladContext, mode: str, depth: int) -> tuple[Term, Term]:
        """Synthesize at a possibly different ambient mode; the context must
        still sit above it or the attempt is abandoned."""
        for _, _, m in ctx.entries:
            if not mode_leq(self.cfg.theory, mode, m):
                raise _Retry()
        return self.gen_synth(ctx, mode, depth)


# ---------------------------------------------------------------------------
# emitting checked judgments


def gen_graded_case(cfg: CheckerConfig, rng: random.Random, max_depth: int = 3) -> GradedCase:
    gen = GradedGen(cfg, rng, max_depth)
    for _ in range(RETRY_BUDGET):
        try:
            ctx = gen.gen_ctx(max_depth)
            term, ty = gen.gen_synth(ctx, max_depth)
            syn, _ = infer_graded(cfg, ctx, term)
            der = check_graded(cfg, syn.usage, ctx, term, syn.type_)
            assert der.rule != "G-subusage"
            return GradedCase(
                syn.usage, ctx, term, syn.type_,
                has_subusage=derivation_has_subusage(der),
            )
        except (_Retry, CheckError):
            continue
    raise _exhausted("a graded judgment")


def gen_mixed_case(
    cfg: CheckerConfig, rng: random.Random, max_depth: int = 3, min_zone: int = 0
) -> MixedCase:
    gen = MixedGen(cfg, rng, max_depth)
    for _ in range(RETRY_BUDGET):
        try:
            gctx = gen.graded.gen_ctx(max_depth)
            zone = gen.gen_zone(gctx, max_depth, min_len=min_zone)
            ty = gen.gen_linear_type(gctx, max_depth - 1)
            term = gen.gen_consume(gctx, list(zone.entries), ty, max_depth)
            syn, _ = infer_mixed(cfg, gctx, zone, term)
            der = check_mixed(cfg, syn.usage, gctx, zone, term, syn.type_)
            assert der.rule != "M-subusage"
            return MixedCase(
                syn.usage, gctx, zone, term, syn.type_,
                has_subusage=derivation_has_subusage(der),
            )
        except (_Retry, CheckError):
            continue
    raise _exhausted("a mixed judgment")


def gen_glad_case(cfg: GladCheckerConfig, rng: random.Random, max_depth: int = 3) -> GladCase:
    gen = GladGen(cfg, rng, max_depth)
    for _ in range(RETRY_BUDGET):
        try:
            mode = rng.choice(gen.mode_ids)
            ctx = gen.gen_ctx(mode, max_depth)
            term, ty = gen.gen_synth(ctx, mode, max_depth)
            syn, _ = infer_glad(cfg, ctx, mode, term)
            der = check_glad(cfg, syn.usage, ctx, mode, term, syn.type_)
            assert der.rule != "glad-subusage"
            return GladCase(
                syn.usage, ctx, mode, term, syn.type_,
                has_subusage=derivation_has_subusage(der),
            )
        except (_Retry, CheckError):
            continue
    raise _exhausted("a mode-indexed judgment")


# ---------------------------------------------------------------------------
# substitution


@dataclass(frozen=True)
class GradedSubstPair:
    outer: GradedCase          # over prefix + cut + suffix
    cut: int                   # entries after the cut hypothesis
    inner: GradedCase          # over the prefix only, typed at the cut's type


def gen_graded_subst_pair(cfg: CheckerConfig, rng: random.Random, max_depth: int = 3) -> GradedSubstPair:
    gen = GradedGen(cfg, rng, max_depth)
    for _ in range(RETRY_BUDGET):
        try:
            prefix = gen.gen_ctx(max_depth)
            if rng.random() < 0.3:
                # cut a type hypothesis, so suffix entry types get rewritten
                t0, x_ty = gen.gen_type(prefix, max_depth - 1), TypeU()
            else:
                t0, x_ty = gen.gen_synth(prefix, max_depth - 1)
            syn0, _ = infer_graded(cfg, prefix, t0)
            der0 = check_graded(cfg, syn0.usage, prefix, t0, x_ty)
            assert der0.rule != "G-subusage"
            inner = GradedCase(
                syn0.usage, prefix, t0, x_ty,
                has_subusage=derivation_has_subusage(der0),
            )

            ctx = prefix.extended(gen.fresh(prefix.names(), "cut"), x_ty)
            n_suffix = rng.randint(0, 2)
            for i in range(n_suffix):
                ctx = ctx.extended(f"s{i}", gen.gen_type(ctx, max_depth - 2))
            term, ty = gen.gen_synth(ctx, max_depth)
            if rng.random() < 0.6:
                # make sure the cut hypothesis is actually consumed
                x_ix = n_suffix
                x_here = shift_term(x_ty, g_by=x_ix + 1)
                ty2 = BoxTimes(one(cfg.semiring), "_", x_here, shift_term(ty, g_by=1))
                term = Ascribe(Pair(Var(x_ix), term), ty2)
                ty = ty2
            syn, _ = infer_graded(cfg, ctx, term)
            der = check_graded(cfg, syn.usage, ctx, term, syn.type_)
            assert der.rule != "G-subusage"
            outer = GradedCase(
                syn.usage, ctx, term, syn.type_,
                has_subusage=derivation_has_subusage(der),
            )
            return GradedSubstPair(outer, n_suffix, inner)
        except (_Retry, CheckError):
            continue
    raise _exhausted("a graded substitution pair")


def substitution_check_graded(cfg: CheckerConfig, pair: GradedSubstPair) -> None:
    """Splice the inner derivation into the outer at the cut and require the
    checker to reproduce the predicted vector exactly."""
    outer, inner = pair.outer, pair.inner
    k = pair.cut
    n = len(outer.ctx)
    n_prefix = n - k - 1
    delta1 = GradeVector(outer.delta.entries[:n_prefix])
    r = outer.delta.entries[n_prefix]
    delta2 = GradeVector(outer.delta.entries[n_prefix + 1 :])
    expected = GradeVector(
        vec_add(delta1, vec_scale(r, inner.delta)).entries + delta2.entries
    )
    suffix = outer.ctx.entries[n_prefix + 1 :]
    new_suffix = subst_graded_suffix(suffix, inner.term)
    new_ctx = GradedContext(outer.ctx.entries[:n_prefix] + tuple(new_suffix))
    new_term = subst_term(inner.term, k, outer.term)
    new_ty = subst_term(inner.term, k, outer.type_)
    der = check_graded(cfg, expected, new_ctx, new_term, new_ty)
    if der.rule == "G-subusage" and not outer.has_subusage:
        raise AssertionError(
            f"substitution arithmetic mismatch: synthesized {der.side['synthesized']} "
            f"instead of {expected}"
        )


@dataclass(frozen=True)
class MixedSubstPair:
    outer: MixedCase
    cut: int
    inner: GradedCase


def gen_mixed_subst_pair(cfg: CheckerConfig, rng: random.Random, max_depth: int = 3) -> MixedSubstPair:
    gen = MixedGen(cfg, rng, max_depth)
    for _ in range(RETRY_BUDGET):
        try:
            prefix = gen.graded.gen_ctx(max_depth)
            t0, x_ty = gen.graded.gen_synth(prefix, max_depth - 1)
            syn0, _ = infer_graded(cfg, prefix, t0)
            der0 = check_graded(cfg, syn0.usage, prefix, t0, x_ty)
            assert der0.rule != "G-subusage"
            inner = GradedCase(
                syn0.usage, prefix, t0, x_ty,
                has_subusage=derivation_has_subusage(der0),
            )

            gctx = prefix.extended(gen.graded.fresh(prefix.names(), "cut"), x_ty)
            n_suffix = rng.randint(0, 1)
            for i in range(n_suffix):
                gctx = gctx.extended(f"s{i}", gen.graded.gen_type(gctx, max_depth - 2))
            zone = gen.gen_zone(gctx, max_depth)
            ty = gen.gen_linear_type(gctx, max_depth - 1)
            term = gen.gen_consume(gctx, list(zone.entries), ty, max_depth)
            if rng.random() < 0.6:
                x_ix = n_suffix
                x_here = shift_term(x_ty, g_by=x_ix + 1)
                ty2 = FAdj(one(cfg.semiring), "_", x_here, shift_term(ty, g_by=1))
                term = Ascribe(FPair(Var(x_ix), term), ty2)
                ty = ty2
            syn, _ = infer_mixed(cfg, gctx, zone, term)
            der = check_mixed(cfg, syn.usage, gctx, zone, term, syn.type_)
            assert der.rule != "M-subusage"
            outer = MixedCase(
                syn.usage, gctx, zone, term, syn.type_,
                has_subusage=derivation_has_subusage(der),
            )
            return MixedSubstPair(outer, n_suffix, inner)
        except (_Retry, CheckError):
            continue
    raise _exhausted("a mixed substitution pair")


def substitution_check_mixed(cfg: CheckerConfig, pair: MixedSubstPair) -> None:
    outer, inner = pair.outer, pair.inner
    k = pair.cut
    n = len(outer.gctx)
    n_prefix = n - k - 1
    delta1 = GradeVector(outer.delta.entries[:n_prefix])
    r = outer.delta.entries[n_prefix]
    delta2 = GradeVector(outer.delta.entries[n_prefix + 1 :])
    expected = GradeVector(
        vec_add(delta1, vec_scale(r, inner.delta)).entries + delta2.entries
    )
    suffix = outer.gctx.entries[n_prefix + 1 :]
    new_suffix = subst_graded_suffix(suffix, inner.term)
    new_gctx = GradedContext(outer.gctx.entries[:n_prefix] + tuple(new_suffix))
    new_zone = LinearContext(
        tuple((nm, subst_term(inner.term, k, t)) for nm, t in outer.lctx.entries)
    )
    new_term = subst_term(inner.term, k, outer.term)
    new_ty = subst_term(inner.term, k, outer.type_)
    der = check_mixed(cfg, expected, new_gctx, new_zone, new_term, new_ty)
    if der.rule == "M-subusage" and not outer.has_subusage:
        raise AssertionError(
            f"substitution arithmetic mismatch: synthesized {der.side['synthesized']} "
            f"instead of {expected}"
        )


@dataclass(frozen=True)
class LinearSubstPair:
    """Substitution through the linear zone: the inner judgment's zone is
    spliced into the outer zone at the cut entry."""

    outer: MixedCase
    cut: int                  # zone entries after (newer than) the cut entry
    inner: MixedCase          # same graded context, its own zone


def gen_linear_subst_pair(cfg: CheckerConfig, rng: random.Random, max_depth: int = 3) -> LinearSubstPair:
    gen = MixedGen(cfg, rng, max_depth)
    for _ in range(RETRY_BUDGET):
        try:
            gctx = gen.graded.gen_ctx(max_depth)
            inner_zone = LinearContext(
                tuple((f"i_{nm}", t) for nm, t in gen.gen_zone(gctx, max_depth).entries)
            )
            b_ty = gen.gen_zone_entry_type(gctx, max_depth - 1)
            l0 = gen.gen_consume(gctx, list(inner_zone.entries), b_ty, max_depth)
            syn0, _ = infer_mixed(cfg, gctx, inner_zone, l0)
            der0 = check_mixed(cfg, syn0.usage, gctx, inner_zone, l0, b_ty)
            assert der0.rule != "M-subusage"
            inner = MixedCase(
                syn0.usage, gctx, inner_zone, l0, b_ty,
                has_subusage=derivation_has_subusage(der0),
            )

            before = gen.gen_zone(gctx, max_depth)
            after = gen.gen_zone(gctx, max_depth)
            zone_entries = (
                before.entries + (("cutv", b_ty),) + tuple((f"a_{nm}", t) for nm, t in after.entries)
            )
            zone = LinearContext(zone_entries)
            ty = gen.gen_linear_type(gctx, max_depth - 1)
            term = gen.gen_consume(gctx, list(zone.entries), ty, max_depth)
            syn, _ = infer_mixed(cfg, gctx, zone, term)
            der = check_mixed(cfg, syn.usage, gctx, zone, term, syn.type_)
            assert der.rule != "M-subusage"
            outer = MixedCase(
                syn.usage, gctx, zone, term, syn.type_,
                has_subusage=derivation_has_subusage(der),
            )
            return LinearSubstPair(outer, len(after), inner)
        except (_Retry, CheckError):
            continue
    raise _exhausted("a linear substitution pair")


def substitution_check_linear(cfg: CheckerConfig, pair: LinearSubstPair) -> None:
    outer, inner = pair.outer, pair.inner
    k = pair.cut
    n = len(outer.lctx)
    cut_pos = n - 1 - k
    expected = vec_add(outer.delta, inner.delta)
    new_zone = LinearContext(
        outer.lctx.entries[:cut_pos] + inner.lctx.entries + outer.lctx.entries[cut_pos + 1 :]
    )
    new_term = subst_term(
        inner.term, k, outer.term, zone=Zone.LINEAR, splice_width=len(inner.lctx)
    )
    der = check_mixed(cfg, expected, outer.gctx, new_zone, new_term, outer.type_)
    if der.rule == "M-subusage":
        raise AssertionError(
            f"linear substitution arithmetic mismatch: synthesized "
            f"{der.side['synthesized']} instead of {expected}"
        )


@dataclass(frozen=True)
class GladSubstPair:
    outer: GladCase
    cut: int
    inner: GladCase            # over the prefix, at the cut entry's mode


def gen_glad_subst_pair(cfg: GladCheckerConfig, rng: random.Random, max_depth: int = 3) -> GladSubstPair:
    gen = GladGen(cfg, rng, max_depth)
    for _ in range(RETRY_BUDGET):
        try:
            ambient = rng.choice(gen.mode_ids)
            cut_mode = rng.choice(gen.uppers(ambient))
            prefix = GladContext(())
            for i in range(rng.randint(0, 2)):
                m = rng.choice(gen.uppers(cut_mode))
                prefix = prefix.extended(f"p{i}", gen.gen_type(prefix, m, max_depth - 2), m)
            t0, x_ty = gen.gen_synth(prefix, cut_mode, max_depth - 1)
            _gate_ok(cfg, prefix, t0)
            syn0, _ = infer_glad(cfg, prefix, cut_mode, t0)
            der0 = check_glad(cfg, syn0.usage, prefix, cut_mode, t0, x_ty)
            assert der0.rule != "glad-subusage"
            inner = GladCase(
                syn0.usage, prefix, cut_mode, t0, x_ty,
                has_subusage=derivation_has_subusage(der0),
            )

            ctx = prefix.extended("cut", x_ty, cut_mode)
            n_suffix = rng.randint(0, 2)
            for i in range(n_suffix):
                m = rng.choice(gen.uppers(ambient))
                ctx = ctx.extended(f"s{i}", gen.gen_type(ctx, m, max_depth - 2), m)
            term, ty = gen.gen_synth(ctx, ambient, max_depth)
            if rng.random() < 0.6:
                x_ix = n_suffix
                x_here = shift_term(x_ty, g_by=x_ix + 1)
                q = one(cfg.theory.semiring_of(cut_mode))
                ty2 = TensorG(q, cut_mode, "_", x_here, shift_term(ty, g_by=1))
                term = Ascribe(PairG(Var(x_ix), term), ty2)
                ty = ty2
            _gate_ok(cfg, ctx, term)
            syn, _ = infer_glad(cfg, ctx, ambient, term)
            der = check_glad(cfg, syn.usage, ctx, ambient, term, syn.type_)
            assert der.rule != "glad-subusage"
            # Splicing puts copies of the cut derivation in scope of every
            # hypothesis and binder newer than the cut, so all of its judgment
            # modes must sit below theirs.  (In the declarative system this is
            # forced at each cut-variable occurrence by the weakening steps
            # that brought those newer entries into scope.)
            inner_modes = _glad_judgment_modes(der0)
            scope_modes = _glad_scope_modes(der, len(prefix))
            if not all(
                mode_leq(cfg.theory, a, b) for a in inner_modes for b in scope_modes
            ):
                raise _Retry()
            outer = GladCase(
                syn.usage, ctx, ambient, term, syn.type_,
                has_subusage=derivation_has_subusage(der),
            )
            return GladSubstPair(outer, n_suffix, inner)
        except (_Retry, CheckError):
            continue
    raise _exhausted("a mode-indexed substitution pair")


def _gate_ok(cfg: GladCheckerConfig, ctx: GladContext, t: Term) -> None:
    fv = free_vars(t)
    n = len(ctx)
    for pos, (_, _, m) in enumerate(ctx.entries):
        if (n - 1 - pos) not in fv and not cfg.theory.weak(m):
            raise _Retry()


def _glad_judgment_modes(der: Derivation) -> set[str]:
    """Every mode a judgment of the derivation is made at."""
    out: set[str] = set()
    if isinstance(der.conclusion, GladTyping):
        out.add(der.conclusion.mode)
    for p in der.premises:
        out |= _glad_judgment_modes(p)
    return out


def _glad_scope_modes(der: Derivation, cut_pos: int) -> set[str]:
    """Modes of context entries newer than position ``cut_pos`` in any
    judgment of the derivation (suffix hypotheses and binders alike)."""
    out: set[str] = set()
    ctx = getattr(der.conclusion, "ctx", None)
    if isinstance(ctx, GladContext):
        for _, _, m in ctx.entries[cut_pos + 1 :]:
            out.add(m)
    for p in der.premises:
        out |= _glad_scope_modes(p, cut_pos)
    return out


def substitution_check_glad(cfg: GladCheckerConfig, pair: GladSubstPair) -> None:
    outer, inner = pair.outer, pair.inner
    k = pair.cut
    n = len(outer.ctx)
    n_prefix = n - k - 1
    delta1 = GradeVector(outer.delta.entries[:n_prefix])
    r = outer.delta.entries[n_prefix]
    delta2 = GradeVector(outer.delta.entries[n_prefix + 1 :])
    prefix_modes = tuple(m for _, _, m in outer.ctx.entries[:n_prefix])
    scaled = cross_scale(cfg.theory, inner.mode, r, prefix_modes, inner.delta)
    expected = GradeVector(vec_add(delta1, scaled).entries + delta2.entries)
    suffix = outer.ctx.entries[n_prefix + 1 :]
    new_suffix = tuple(
        (nm, subst_term(inner.term, i, ty), m)
        for i, (nm, ty, m) in enumerate(suffix)
    )
    new_ctx = GladContext(outer.ctx.entries[:n_prefix] + new_suffix)
    new_term = subst_term(inner.term, k, outer.term)
    new_ty = subst_term(inner.term, k, outer.type_)
    der = check_glad(cfg, expected, new_ctx, outer.mode, new_term, new_ty)
    if der.rule == "glad-subusage" and not outer.has_subusage:
        raise AssertionError(
            f"substitution arithmetic mismatch: synthesized {der.side['synthesized']} "
            f"instead of {expected}"
        )


# ---------------------------------------------------------------------------
# subject reduction


def all_redex_positions(t: Term) -> list[tuple[tuple[int, ...], Term]]:
    """Every position where the root-step relation fires, with the reduct of
    rewriting that position (leftmost-outermost order)."""
    out: list[tuple[tuple[int, ...], Term]] = []

    def walk(u: Term, path: tuple[int, ...]) -> None:
        hit = root_step(u)
        if hit is not None:
            out.append((path, hit[0]))
        for i, (field_name, _, _) in enumerate(children_spec(u)):
            walk(getattr(u, field_name), path + (i,))

    walk(t, ())
    return out


def _rebuild(t: Term, path: tuple[int, ...], new: Term) -> Term:
    if not path:
        return new
    spec = children_spec(t)
    field_name = spec[path[0]][0]
    child = getattr(t, field_name)
    return replace(t, **{field_name: _rebuild(child, path[1:], new)})


def subject_reduction_probe_graded(cfg: CheckerConfig, case: GradedCase) -> int:
    """Reduce at every redex position; each reduct must still check against
    the unchanged vector and type.  Returns the number of positions probed."""
    probed = 0
    for path, reduct in all_redex_positions(case.term):
        new_term = _rebuild(case.term, path, reduct)
        check_graded(cfg, case.delta, case.ctx, new_term, case.type_)
        probed += 1
    return probed


def subject_reduction_probe_mixed(cfg: CheckerConfig, case: MixedCase) -> int:
    probed = 0
    for path, reduct in all_redex_positions(case.term):
        new_term = _rebuild(case.term, path, reduct)
        check_mixed(cfg, case.delta, case.gctx, case.lctx, new_term, case.type_)
        probed += 1
    return probed


def subject_reduction_probe_glad(cfg: GladCheckerConfig, case: GladCase) -> int:
    probed = 0
    for path, reduct in all_redex_positions(case.term):
        new_term = _rebuild(case.term, path, reduct)
        check_glad(cfg, case.delta, case.ctx, case.mode, new_term, case.type_)
        probed += 1
    return probed


# ---------------------------------------------------------------------------
# contraction


@dataclass(frozen=True)
class GradedContractionCase:
    case: GradedCase
    cut: int                   # suffix length after the duplicated pair


def gen_graded_contraction(cfg: CheckerConfig, rng: random.Random, max_depth: int = 3) -> GradedContractionCase:
    gen = GradedGen(cfg, rng, max_depth)
    for _ in range(RETRY_BUDGET):
        try:
            prefix = gen.gen_ctx(max_depth - 1)
            x_ty = gen.gen_type(prefix, max_depth - 2)
            ctx = prefix.extended("dupA", x_ty)
            ctx = ctx.extended("dupB", shift_term(x_ty, g_by=1))
            n_suffix = rng.randint(0, 1)
            for i in range(n_suffix):
                ctx = ctx.extended(f"s{i}", gen.gen_type(ctx, max_depth - 2))
            term, ty = gen.gen_synth(ctx, max_depth)
            if rng.random() < 0.6 and not isinstance(x_ty, TypeU):
                ixA, ixB = n_suffix + 1, n_suffix
                here = shift_term(x_ty, g_by=ixA + 1)
                ty2 = BoxTimes(one(cfg.semiring), "_", here, shift_term(ty, g_by=1))
                both = BoxTimes(one(cfg.semiring), "_", shift_term(x_ty, g_by=ixB + 1), shift_term(ty2, g_by=1))
                term = Ascribe(Pair(Var(ixB), Ascribe(Pair(Var(ixA), term), ty2)), both)
                ty = both
            syn, _ = infer_graded(cfg, ctx, term)
            der = check_graded(cfg, syn.usage, ctx, term, syn.type_)
            assert der.rule != "G-subusage"
            case = GradedCase(
                syn.usage, ctx, term, syn.type_,
                has_subusage=derivation_has_subusage(der),
            )
            return GradedContractionCase(case, n_suffix)
        except (_Retry, CheckError):
            continue
    raise _exhausted("a graded contraction case")


def contraction_check_graded(cfg: CheckerConfig, cc: GradedContractionCase) -> None:
    """Merge the adjacent duplicated hypotheses: grades add, the newer
    variable is renamed to the older, and the checker must reproduce the
    merged vector exactly."""
    case = cc.case
    k = cc.cut                      # index of the newer duplicate in the term
    n = len(case.ctx)
    pos_new = n - 1 - k             # absolute position of the newer duplicate
    pos_old = pos_new - 1
    p = case.delta.entries[pos_old]
    q = case.delta.entries[pos_new]
    merged_delta = GradeVector(
        case.delta.entries[:pos_old] + (add(p, q),) + case.delta.entries[pos_new + 1 :]
    )
    suffix = case.ctx.entries[pos_new + 1 :]
    new_suffix = subst_graded_suffix(suffix, Var(0))
    new_ctx = GradedContext(case.ctx.entries[:pos_new] + tuple(new_suffix))
    new_term = subst_term(Var(0), k, case.term)
    new_ty = subst_term(Var(0), k, case.type_)
    der = check_graded(cfg, merged_delta, new_ctx, new_term, new_ty)
    if der.rule == "G-subusage" and not case.has_subusage:
        raise AssertionError(
            f"contraction arithmetic mismatch: synthesized {der.side['synthesized']} "
            f"instead of {merged_delta}"
        )


@dataclass(frozen=True)
class GladContractionCase:
    case: GladCase
    cut: int


def gen_glad_contraction(cfg: GladCheckerConfig, rng: random.Random, max_depth: int = 3) -> GladContractionCase:
    gen = GladGen(cfg, rng, max_depth)
    for _ in range(RETRY_BUDGET):
        try:
            ambient = rng.choice(gen.mode_ids)
            dup_mode = rng.choice(gen.uppers(ambient))
            prefix = GladContext(())
            for i in range(rng.randint(0, 1)):
                m = rng.choice(gen.uppers(dup_mode))
                prefix = prefix.extended(f"p{i}", gen.gen_type(prefix, m, max_depth - 2), m)
            x_ty = gen.gen_type(prefix, dup_mode, max_depth - 2)
            ctx = prefix.extended("dupA", x_ty, dup_mode)
            ctx = ctx.extended("dupB", shift_term(x_ty, g_by=1), dup_mode)
            n_suffix = rng.randint(0, 1)
            for i in range(n_suffix):
                m = rng.choice(gen.uppers(ambient))
                ctx = ctx.extended(f"s{i}", gen.gen_type(ctx, m, max_depth - 2), m)
            term, ty = gen.gen_synth(ctx, ambient, max_depth)
            if rng.random() < 0.7:
                ixA, ixB = n_suffix + 1, n_suffix
                here = shift_term(x_ty, g_by=ixA + 1)
                q1 = one(cfg.theory.semiring_of(dup_mode))
                ty2 = TensorG(q1, dup_mode, "_", here, shift_term(ty, g_by=1))
                both = TensorG(
                    q1, dup_mode, "_", shift_term(x_ty, g_by=ixB + 1), shift_term(ty2, g_by=1)
                )
                term = Ascribe(PairG(Var(ixB), Ascribe(PairG(Var(ixA), term), ty2)), both)
                ty = both
            _gate_ok(cfg, ctx, term)
            syn, _ = infer_glad(cfg, ctx, ambient, term)
            der = check_glad(cfg, syn.usage, ctx, ambient, term, syn.type_)
            assert der.rule != "glad-subusage"
            case = GladCase(
                syn.usage, ctx, ambient, term, syn.type_,
                has_subusage=derivation_has_subusage(der),
            )
            return GladContractionCase(case, n_suffix)
        except (_Retry, CheckError):
            continue
    raise _exhausted("a mode-indexed contraction case")


def contraction_check_glad(cfg: GladCheckerConfig, cc: GladContractionCase) -> None:
    case = cc.case
    k = cc.cut
    n = len(case.ctx)
    pos_new = n - 1 - k
    pos_old = pos_new - 1
    p = case.delta.entries[pos_old]
    q = case.delta.entries[pos_new]
    merged_delta = GradeVector(
        case.delta.entries[:pos_old] + (add(p, q),) + case.delta.entries[pos_new + 1 :]
    )
    suffix = case.ctx.entries[pos_new + 1 :]
    new_suffix = tuple(
        (nm, subst_term(Var(0), i, ty), m) for i, (nm, ty, m) in enumerate(suffix)
    )
    new_ctx = GladContext(case.ctx.entries[:pos_new] + new_suffix)
    new_term = subst_term(Var(0), k, case.term)
    new_ty = subst_term(Var(0), k, case.type_)
    der = check_glad(cfg, merged_delta, new_ctx, case.mode, new_term, new_ty)
    if der.rule == "glad-subusage" and not case.has_subusage:
        raise AssertionError(
            f"contraction arithmetic mismatch: synthesized {der.side['synthesized']} "
            f"instead of {merged_delta}"
        )


# ---------------------------------------------------------------------------
# moving a trailing linear hypothesis behind the right adjoint


def radj_left_check(cfg: CheckerConfig, case: MixedCase) -> None:
    """The newest linear hypothesis ``x : A`` may be replaced by a graded
    hypothesis ``y : GAdj(A)`` at grade one, eliminating it at each use.  The
    zone must be nonempty."""
    assert len(case.lctx) > 0
    name, a_ty = case.lctx.entries[-1]
    new_gctx = case.gctx.extended(f"{name}_g", GAdj(a_ty))
    new_zone = LinearContext(
        tuple((nm, shift_term(t, g_by=1)) for nm, t in case.lctx.entries[:-1])
    )
    shifted = shift_term(case.term, g_by=1)
    new_term = subst_term(GInv(Var(0)), 0, shifted, zone=Zone.LINEAR)
    new_ty = shift_term(case.type_, g_by=1)
    expected = GradeVector(case.delta.entries + (one(cfg.semiring),))
    der = check_mixed(cfg, expected, new_gctx, new_zone, new_term, new_ty)
    if der.rule == "M-subusage":
        raise AssertionError(
            f"adjoint-shift arithmetic mismatch: synthesized {der.side['synthesized']} "
            f"instead of {expected}"
        )


# ---------------------------------------------------------------------------
# inversion


def inversion_probe_graded(cfg: CheckerConfig, case: GradedCase) -> str | None:
    """Introduction-form subjects decompose into component judgments whose
    rule arithmetic stays below the declared vector.  Returns the shape
    probed, or None when the subject is not an introduction."""
    t, goal = case.term, case.type_
    if isinstance(t, Ascribe):
        t, goal = t.subject, t.type_
    if isinstance(t, UnitJ):
        zero_vec = GradeVector(tuple(zero(g.semiring) for g in case.delta))
        assert vec_leq(zero_vec, case.delta), "unit inversion: zero vector not below"
        head = normalize(goal, cfg.fuel).final
        assert isinstance(head, UnitJType), "unit inversion: type does not reduce to the unit"
        return "unit"
    if isinstance(t, Lam):
        head = normalize(goal, cfg.fuel).final
        if not isinstance(head, GradedArrow):
            return None
        name = t.name
        k = 0
        while name in case.ctx.names() or not name:
            k += 1
            name = f"{t.name or 'x'}{k}"
        u, _ = check_against_graded(
            cfg, case.ctx.extended(name, head.domain), t.body, head.codomain
        )
        widened = GradeVector(tuple(case.delta) + (head.r,))
        assert vec_leq(u, widened), "lambda inversion: body usage not below (delta, r)"
        return "lambda"
    if isinstance(t, Pair):
        head = normalize(goal, cfg.fuel).final
        if not isinstance(head, BoxTimes):
            return None
        u1, _ = check_against_graded(cfg, case.ctx, t.left, head.left)
        u2, _ = check_against_graded(
            cfg, case.ctx, t.right, subst_term(t.left, 0, head.right)
        )
        recombined = vec_add(vec_scale(head.r, u1), u2)
        assert vec_leq(recombined, case.delta), "pair inversion: recombination not below"
        return "pair"
    if isinstance(t, (Inl, Inr)):
        head = normalize(goal, cfg.fuel).final
        if not isinstance(head, BoxPlus):
            return None
        component = head.left if isinstance(t, Inl) else head.right
        u, _ = check_against_graded(cfg, case.ctx, t.body, component)
        assert vec_leq(u, case.delta), "coproduct inversion: component usage not below"
        return "inl" if isinstance(t, Inl) else "inr"
    return None


# ---------------------------------------------------------------------------
# context/vector independence


def ctx_vector_independence_probe(
    cfg: CheckerConfig, ctx: GradedContext, rng: random.Random, samples: int = 5
) -> None:
    """Context well-formedness must accept any vector of the right length and
    reject any other length."""
    elements = cfg.semiring.elements(bound=6)
    for _ in range(samples):
        delta = vec(GradeValue(cfg.semiring, rng.choice(elements)) for _ in range(len(ctx)))
        check_graded_ctx(cfg, delta, ctx)
    bad = vec(GradeValue(cfg.semiring, elements[0]) for _ in range(len(ctx) + 1))
    try:
        check_graded_ctx(cfg, bad, ctx)
    except CheckError as e:
        assert e.code is Code.LENGTH_MISMATCH
    else:
        raise AssertionError("length mismatch not detected")
