"""Independent reference implementations used to cross-check the library.

Everything here works on a different representation than the package (named
variables instead of de Bruijn indices, brute-force closures instead of
incremental ones, sign arithmetic instead of tables), so agreement between
the two is meaningful evidence rather than the same code run twice.
"""

from __future__ import annotations

import dataclasses
import itertools
import random
from typing import Iterator

from gradal.semiring import GradeValue, SemiringSpec, add, mul, one, zero
from gradal.syntax import LVar, Term, Var, children_spec

# ---------------------------------------------------------------------------
# named-variable terms: a parallel representation with globally unique binder
# names, where substitution never needs shifting


def to_named(t: Term, genv: tuple[str, ...] = (), lenv: tuple[str, ...] = (),
             counter: Iterator[int] | None = None) -> tuple:
    """Convert to a nested-tuple named form; binder names are globally fresh."""
    if counter is None:
        counter = itertools.count()
    if isinstance(t, Var):
        return ("gvar", genv[len(genv) - 1 - t.ix])
    if isinstance(t, LVar):
        return ("lvar", lenv[len(lenv) - 1 - t.ix])
    children = {}
    binders = {}
    for field, gb, lb in children_spec(t):
        gnames = tuple(f"g{next(counter)}" for _ in range(gb))
        lnames = tuple(f"l{next(counter)}" for _ in range(lb))
        binders[field] = (gnames, lnames)
        children[field] = to_named(getattr(t, field), genv + gnames, lenv + lnames, counter)
    scalars = {
        f.name: getattr(t, f.name)
        for f in dataclasses.fields(t)
        if f.name not in children
    }
    return ("node", type(t), scalars, children, binders)


def named_subst(named: tuple, var_key: tuple, replacement: tuple) -> tuple:
    """Substitute for one free variable.  Because every binder name in both
    inputs is globally unique, no capture is possible and no renaming is
    performed — the textbook definition with the side conditions vacuous."""
    if named[0] in ("gvar", "lvar"):
        return replacement if named == var_key else named
    _, ctor, scalars, children, binders = named
    new_children = {
        field: named_subst(child, var_key, replacement)
        for field, child in children.items()
    }
    return ("node", ctor, scalars, new_children, binders)


def from_named(named: tuple, genv: tuple[str, ...] = (), lenv: tuple[str, ...] = ()) -> Term:
    if named[0] == "gvar":
        return Var(len(genv) - 1 - genv.index(named[1]) if named[1] in genv else _missing(named))
    if named[0] == "lvar":
        return LVar(len(lenv) - 1 - lenv.index(named[1]) if named[1] in lenv else _missing(named))
    _, ctor, scalars, children, binders = named
    kwargs = dict(scalars)
    for field, child in children.items():
        gnames, lnames = binders[field]
        kwargs[field] = from_named(child, genv + gnames, lenv + lnames)
    return ctor(**kwargs)


def _missing(named: tuple):
    raise AssertionError(f"escaped variable {named!r}")


def from_named_var_index(named: tuple, genv: tuple[str, ...], lenv: tuple[str, ...]) -> Term:
    return from_named(named, genv, lenv)


# note: genv.index finds the OUTERMOST occurrence; with globally fresh names
# every name occurs once, so this is unambiguous


# ---------------------------------------------------------------------------
# generic well-scoped term generator (per fragment), for round-trip and
# substitution cross-checks; terms are well-scoped but not necessarily
# well-typed

from gradal.syntax import (  # noqa: E402
    App,
    AppG,
    AppLin,
    Ascribe,
    BoxPlus,
    BoxTimes,
    Case,
    CaseG,
    FAdj,
    FElim,
    FPair,
    GAdj,
    GInv,
    GWrap,
    GradedArrow,
    ILin,
    Inl,
    InlG,
    Inr,
    InrG,
    Lam,
    LamG,
    LamLin,
    LinearU,
    Lollipop,
    OplusG,
    Pair,
    PairElim,
    PairG,
    PairGElim,
    PiG,
    ShiftDown,
    ShiftUp,
    StarElim,
    StarM,
    Tensor,
    TensorElim,
    TensorG,
    TensorPair,
    TypeU,
    UnitI,
    UnitIElim,
    UnitIM,
    UnitJ,
    UnitJElim,
    UnitJType,
)

# (constructor, zone of the node, zone of each child field)
_GRADED_NODES = {
    UnitJ: {}, UnitJType: {}, TypeU: {}, LinearU: {},
    UnitJElim: {"subject_scrut": "g", "body": "g"},
    Pair: {"left": "g", "right": "g"},
    PairElim: {"subject_scrut": "g", "body": "g"},
    Inl: {"body": "g"}, Inr: {"body": "g"},
    Case: {"subject_scrut": "g", "left": "g", "right": "g"},
    Lam: {"body": "g"}, App: {"fn": "g", "arg": "g"},
    GradedArrow: {"domain": "g", "codomain": "g"},
    BoxTimes: {"left": "g", "right": "g"},
    BoxPlus: {"left": "g", "right": "g"},
    GAdj: {"body": "l"}, GWrap: {"body": "l"},
    Ascribe: {"subject": "g", "type_": "g"},
}
_LINEAR_NODES = {
    UnitI: {}, ILin: {},
    UnitIElim: {"subject_scrut": "l", "body": "l"},
    LamLin: {"body": "l"}, AppLin: {"fn": "l", "arg": "l"},
    TensorPair: {"left": "l", "right": "l"},
    TensorElim: {"subject_scrut": "l", "body": "l"},
    FPair: {"graded_part": "g", "linear_part": "l"},
    FElim: {"subject_scrut": "l", "body": "l"},
    GInv: {"body": "g"},
    Lollipop: {"domain": "l", "codomain": "l"},
    Tensor: {"left": "l", "right": "l"},
    FAdj: {"domain": "g", "body": "l"},
    Ascribe: {"subject": "l", "type_": "l"},
}
_GLAD_NODES = {
    TypeU: {},
    StarElim: {"subject_scrut": "g", "body": "g"},
    PairG: {"left": "g", "right": "g"},
    PairGElim: {"subject_scrut": "g", "body": "g"},
    InlG: {"body": "g"}, InrG: {"body": "g"},
    CaseG: {"subject_scrut": "g", "left": "g", "right": "g"},
    LamG: {"body": "g"}, AppG: {"fn": "g", "arg": "g"},
    PiG: {"domain": "g", "codomain": "g"},
    TensorG: {"left": "g", "right": "g"},
    OplusG: {"left": "g", "right": "g"},
    ShiftUp: {"body": "g"}, ShiftDown: {"body": "g"},
    Ascribe: {"subject": "g", "type_": "g"},
}
# leaf constructors that need scalar arguments built specially
_NEEDS_MODE_LEAF = (UnitIM, StarM)


class ScopedTermGen:
    """Random well-scoped terms for one fragment.

    ``fragment``: "graded" builds dmGL graded-zone terms (with linear
    subterms under the adjoint bridges), "mixed" builds linear-zone terms,
    "glad" builds many-mode terms.  ``modes`` maps mode id -> semiring and is
    required for "glad".
    """

    def __init__(self, rng: random.Random, semiring: SemiringSpec,
                 fragment: str, modes: dict[str, SemiringSpec] | None = None):
        self.rng = rng
        self.semiring = semiring
        self.fragment = fragment
        self.modes = modes or {}
        if fragment == "glad" and not self.modes:
            raise ValueError("glad generation needs a mode map")

    def grade(self, semiring: SemiringSpec | None = None) -> GradeValue:
        s = semiring or self.semiring
        return GradeValue(s, self.rng.choice(s.elements(bound=3)))

    def term(self, depth: int, g: int, l: int, zone: str | None = None) -> Term:
        zone = zone or ("l" if self.fragment == "mixed" else "g")
        nodes = {
            "graded": {"g": _GRADED_NODES, "l": _LINEAR_NODES},
            "mixed": {"g": _GRADED_NODES, "l": _LINEAR_NODES},
            "glad": {"g": _GLAD_NODES, "l": {}},
        }[self.fragment][zone]
        leaves: list = []
        if zone == "g" and g > 0:
            leaves.extend([("var",)] * 3)
        if zone == "l" and l > 0:
            leaves.extend([("lvar",)] * 3)
        leaf_ctors = [c for c, kids in nodes.items() if not kids]
        if self.fragment == "glad":
            leaf_ctors = leaf_ctors + list(_NEEDS_MODE_LEAF)
        leaves.extend(("ctor", c) for c in leaf_ctors)
        if depth <= 0:
            pick = self.rng.choice(leaves)
            return self._leaf(pick, g, l)
        inner = [("ctor", c) for c, kids in nodes.items() if kids]
        pick = self.rng.choice(leaves + inner * 2)
        if pick[0] != "ctor" or pick[1] in leaf_ctors or pick[1] in _NEEDS_MODE_LEAF:
            return self._leaf(pick, g, l)
        return self._node(pick[1], nodes[pick[1]], depth, g, l)

    def _leaf(self, pick: tuple, g: int, l: int) -> Term:
        if pick[0] == "var":
            return Var(self.rng.randrange(g))
        if pick[0] == "lvar":
            return LVar(self.rng.randrange(l))
        ctor = pick[1]
        if ctor in _NEEDS_MODE_LEAF:
            return ctor(self.rng.choice(sorted(self.modes)))
        return ctor()

    def _node(self, ctor: type, kid_zones: dict[str, str], depth: int, g: int, l: int) -> Term:
        kwargs: dict = {}
        scalar_fields = [
            f.name for f in dataclasses.fields(ctor) if f.name not in kid_zones
        ]
        mode = None
        if "mode" in scalar_fields:
            mode = self.rng.choice(sorted(self.modes))
            kwargs["mode"] = mode
        if "mode_lo" in scalar_fields:
            kwargs["mode_lo"] = self.rng.choice(sorted(self.modes))
            kwargs["mode_hi"] = self.rng.choice(sorted(self.modes))
        for fname in scalar_fields:
            if fname in kwargs:
                continue
            if fname in ("r", "q"):
                s = self.modes[mode] if mode is not None else self.semiring
                if ctor is CaseG:
                    s = self.modes[self.rng.choice(sorted(self.modes))]
                kwargs[fname] = self.grade(s)
            elif fname in ("name", "name1", "name2", "gname", "lname"):
                kwargs[fname] = self.rng.choice(("a", "b", "c", "x", "y"))
        for field, gb, lb in children_spec_of(ctor):
            if field not in kid_zones:
                continue
            zone = kid_zones[field]
            kwargs[field] = self.term(
                depth - 1,
                g + gb,
                l + lb,
                zone,
            )
        return ctor(**kwargs)


_SPEC_CACHE: dict[type, tuple] = {}


def children_spec_of(ctor: type) -> tuple:
    """children_spec keyed by constructor, via a throwaway instance-free path."""
    from gradal.syntax import _CHILDREN  # single source of binder arity truth

    return _CHILDREN[ctor]


# ---------------------------------------------------------------------------
# finite preorders: brute-force reflexive-transitive closure


def warshall_closure(elements: tuple[str, ...], pairs: set[tuple[str, str]]) -> set[tuple[str, str]]:
    closed = {(e, e) for e in elements} | set(pairs)
    for k in elements:
        for a in elements:
            for b in elements:
                if (a, k) in closed and (k, b) in closed:
                    closed.add((a, b))
    return closed


def declared_order_pairs(sr_text: str) -> tuple[tuple[str, ...], set[tuple[str, str]]]:
    """Re-parse just the `elements` line and `order` block of a semiring file,
    independently of the package's config loader."""
    elements: tuple[str, ...] = ()
    pairs: set[tuple[str, str]] = set()
    in_order = False
    for raw in sr_text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split()
        if head[0] == "elements":
            elements = tuple(head[1:])
            in_order = False
        elif head[0] == "order" and len(head) == 1:
            in_order = True
        elif in_order and "<=" in head:
            a, _, b = head
            pairs.add((a, b))
        elif head[0] in ("add", "mul", "zero", "one", "carrier", "semiring"):
            in_order = False
    return elements, pairs


# ---------------------------------------------------------------------------
# variance algebra from sign arithmetic

_SIGN = {"^^": +1, "vv": -1, "~~": 0}


def variance_mul_oracle(a: str, b: str) -> str:
    """Composition of dependencies: signs multiply; the never-used element
    annihilates; invariance absorbs."""
    if a == "??" or b == "??":
        return "??"
    product = _SIGN[a] * _SIGN[b]
    return {1: "^^", -1: "vv", 0: "~~"}[product]


def variance_add_oracle(a: str, b: str, order: set[tuple[str, str]],
                        elements: tuple[str, ...]) -> str:
    """Aggregation of two uses is their greatest lower bound in the preorder
    (the most restrictive variance compatible with both)."""
    lower = [c for c in elements if (c, a) in order and (c, b) in order]
    glbs = [c for c in lower if all((d, c) in order for d in lower)]
    assert len(glbs) == 1, f"no unique glb for {a},{b}"
    return glbs[0]


# ---------------------------------------------------------------------------
# canonical additive image of the naturals in any semiring


def nat_image_oracle(target: SemiringSpec, n: int) -> GradeValue:
    acc = zero(target)
    step = one(target)
    for _ in range(n):
        acc = add(acc, step)
    return acc
