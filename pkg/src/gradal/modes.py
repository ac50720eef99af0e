"""Mode theories: preordered collections of modes with graded structure.

A mode theory assigns every mode a grade semiring and a weakening capability
flag, preorders the modes, and provides a semiring morphism ``f_ij`` for every
related pair ``i <= j`` (identity on the diagonal, closed under composition).
Cross-mode scaling ``r * s := f(r) * s`` lets a grade from one mode act on
grades of any related mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import CheckError, Code
from .semiring import (
    GradeValue,
    GradeVector,
    LawViolation,
    SemiringMorphism,
    SemiringSpec,
    apply_morphism,
    mul,
    synthesize_unique_morphism,
    validate_morphism,
)


@dataclass(frozen=True, eq=False)
class Mode:
    """A mode: its grade semiring and whether its variables admit weakening."""

    id: str
    semiring: SemiringSpec
    weak: bool

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"Mode({self.id!r}, {self.semiring.id!r}, weak={self.weak})"


def _closure_pairs(ids: Sequence[str], pairs: Iterable[tuple[str, str]]) -> frozenset[tuple[str, str]]:
    rel: set[tuple[str, str]] = {(i, i) for i in ids}
    rel.update(pairs)
    changed = True
    while changed:
        changed = False
        for a, b in list(rel):
            for c, d in list(rel):
                if b == c and (a, d) not in rel:
                    rel.add((a, d))
                    changed = True
    return frozenset(rel)


class ModeTheory:
    """A validated-on-construction family of modes.

    ``order_generators`` are the declared inequalities; the stored order is
    their reflexive-transitive closure.  ``morphisms`` must cover every
    declared generator; identities are synthesized on the diagonal and
    missing composite pairs are filled in by composing along any path
    (path-independence is the functoriality law, checked by
    :func:`validate_mode_theory`).
    """

    def __init__(
        self,
        id: str,
        modes: Sequence[Mode],
        order_generators: Iterable[tuple[str, str]],
        morphisms: Mapping[tuple[str, str], SemiringMorphism],
    ) -> None:
        self.id = id
        self.modes: dict[str, Mode] = {}
        for m in modes:
            if m.id in self.modes:
                raise CheckError(Code.DUPLICATE_NAME, f"duplicate mode id '{m.id}'")
            self.modes[m.id] = m
        for a, b in order_generators:
            for x in (a, b):
                if x not in self.modes:
                    raise CheckError(Code.UNKNOWN_MODE, f"order mentions unknown mode '{x}'")
        self.order: frozenset[tuple[str, str]] = _closure_pairs(tuple(self.modes), order_generators)
        self.morphisms: dict[tuple[str, str], SemiringMorphism] = dict(morphisms)
        for key in self.morphisms:
            if key not in self.order:
                raise CheckError(
                    Code.NO_MORPHISM,
                    f"morphism declared for unrelated modes {key[0]} -> {key[1]}",
                    payload={"pair": key},
                )
        for m in self.modes.values():
            self.morphisms.setdefault((m.id, m.id), _identity_morphism(m.semiring))
        # Fill composite pairs by path composition.
        changed = True
        while changed:
            changed = False
            for i, j in self.order:
                if (i, j) in self.morphisms:
                    continue
                for k in self.modes:
                    if (i, k) in self.morphisms and (k, j) in self.morphisms and i != k and k != j:
                        self.morphisms[(i, j)] = _compose(self.morphisms[(i, k)], self.morphisms[(k, j)])
                        changed = True
                        break
        missing = [p for p in self.order if p not in self.morphisms]
        if missing:
            raise CheckError(
                Code.NO_MORPHISM,
                f"no morphism derivable for related modes {missing[0][0]} -> {missing[0][1]}",
                payload={"pairs": tuple(missing)},
            )

    def mode(self, mode_id: str) -> Mode:
        try:
            return self.modes[mode_id]
        except KeyError:
            raise CheckError(Code.UNKNOWN_MODE, f"unknown mode '{mode_id}'") from None

    def semiring_of(self, mode_id: str) -> SemiringSpec:
        return self.mode(mode_id).semiring

    def weak(self, mode_id: str) -> bool:
        return self.mode(mode_id).weak

    def morphism(self, src: str, dst: str) -> SemiringMorphism:
        self.mode(src)
        self.mode(dst)
        try:
            return self.morphisms[(src, dst)]
        except KeyError:
            raise CheckError(
                Code.NO_MORPHISM,
                f"modes '{src}' and '{dst}' are not related; no morphism",
                payload={"source": src, "target": dst},
            ) from None

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"ModeTheory({self.id!r}, modes={sorted(self.modes)})"


def _identity_morphism(s: SemiringSpec) -> SemiringMorphism:
    if s.carrier is None:
        # On the naturals the canonical morphism is the identity.
        return SemiringMorphism(s, s, None)
    return SemiringMorphism(s, s, {e: e for e in s.carrier})


def _compose(f: SemiringMorphism, g: SemiringMorphism) -> SemiringMorphism:
    """``g . f`` (apply ``f`` first)."""
    if f.source.carrier is None:
        # Out of the naturals every morphism is the canonical one, and the
        # composite of canonical morphisms is canonical.
        return SemiringMorphism(f.source, g.target, None)
    table = {e: g.apply(f.apply(GradeValue(f.source, e))).value for e in f.source.carrier}
    return SemiringMorphism(f.source, g.target, table)


def mode_leq(mt: ModeTheory, m1: str, m2: str) -> bool:
    """The mode preorder (stored closed)."""
    mt.mode(m1)
    mt.mode(m2)
    return (m1, m2) in mt.order


def mode_leq_vec(mt: ModeTheory, m: str, entry_modes: Sequence[str]) -> bool:
    """``m <= every entry mode``; vacuously true for an empty context."""
    return all(mode_leq(mt, m, mi) for mi in entry_modes)


def scale_into(mt: ModeTheory, m: str, r: GradeValue, target_mode: str) -> GradeValue:
    """``f_{m, target}(r)`` — transport a grade along the mode order."""
    if r.semiring.id != mt.semiring_of(m).id:
        raise CheckError(
            Code.GRADE_MODE_MISMATCH,
            f"grade of semiring '{r.semiring.id}' is not a grade of mode '{m}' "
            f"(expects '{mt.semiring_of(m).id}')",
            payload={"mode": m, "semiring": r.semiring.id},
        )
    return apply_morphism(mt.morphism(m, target_mode), r)


def cross_scale(
    mt: ModeTheory,
    m: str,
    r: GradeValue,
    entry_modes: Sequence[str],
    d: GradeVector,
) -> GradeVector:
    """Scale a mixed-mode vector by a grade of mode ``m``.

    Entry ``i`` becomes ``f_{m, M_i}(r) * d_i``.  Re-verifies the
    ``mode_leq_vec`` precondition rather than trusting the caller; a missing
    morphism is a ``NoMorphism`` error.
    """
    if len(entry_modes) != len(d):
        raise CheckError(
            Code.LENGTH_MISMATCH,
            f"cross-scaling a vector of length {len(d)} against {len(entry_modes)} modes",
        )
    if not mode_leq_vec(mt, m, entry_modes):
        raise CheckError(
            Code.NO_MORPHISM,
            f"mode '{m}' is not below every entry mode; cross-scaling undefined",
            payload={"mode": m, "entry_modes": tuple(entry_modes)},
        )
    out = []
    for mi, gi in zip(entry_modes, d):
        if gi.semiring.id != mt.semiring_of(mi).id:
            raise CheckError(
                Code.GRADE_MODE_MISMATCH,
                f"vector entry of semiring '{gi.semiring.id}' against mode '{mi}' "
                f"(expects '{mt.semiring_of(mi).id}')",
                payload={"mode": mi, "semiring": gi.semiring.id},
            )
        out.append(mul(scale_into(mt, m, r, mi), gi))
    return GradeVector(tuple(out))


def validate_mode_theory(mt: ModeTheory) -> list[LawViolation]:
    """Check mode-theory invariants, reporting violations with witnesses.

    Checks: Weak is monotone along the order; diagonal morphisms are
    identities; morphism assignment is functorial (``f_jk . f_ij = f_ik``,
    exhaustive on finite carriers, sampled on the naturals); every stored
    morphism satisfies the semiring-morphism laws; morphism endpoints carry
    the right semirings.
    """
    out: list[LawViolation] = []
    for i, j in sorted(mt.order):
        if mt.weak(i) and not mt.weak(j):
            out.append(LawViolation("weak-monotone", (i, j)))
    for (i, j), f in sorted(mt.morphisms.items()):
        if f.source.id != mt.semiring_of(i).id or f.target.id != mt.semiring_of(j).id:
            out.append(LawViolation("morphism-endpoints", (i, j, f.source.id, f.target.id)))
            continue
        for v in validate_morphism(f):
            out.append(LawViolation(f"{v.law}@{i}->{j}", v.witness))
    for i in sorted(mt.modes):
        f = mt.morphisms[(i, i)]
        for e in _sample_elements(mt.semiring_of(i)):
            g = GradeValue(mt.semiring_of(i), e)
            if f.apply(g) != g:
                out.append(LawViolation("identity-diagonal", (i, e)))
    for i, j in sorted(mt.order):
        for j2, k in sorted(mt.order):
            if j2 != j or (i, k) not in mt.order:
                continue
            fij, fjk, fik = mt.morphisms[(i, j)], mt.morphisms[(j, k)], mt.morphisms[(i, k)]
            for e in _sample_elements(mt.semiring_of(i)):
                g = GradeValue(mt.semiring_of(i), e)
                if fjk.apply(fij.apply(g)) != fik.apply(g):
                    out.append(LawViolation("functoriality", (i, j, k, e)))
    unique: list[LawViolation] = []
    seen: set[tuple[str, tuple]] = set()
    for v in out:
        key = (v.law, v.witness)
        if key not in seen:
            seen.add(key)
            unique.append(v)
    return unique


def _sample_elements(s: SemiringSpec) -> tuple:
    if s.carrier is not None:
        return s.carrier
    return tuple(range(8))


def make_unique_morphism(src: Mode, dst: Mode) -> SemiringMorphism:
    """The canonical morphism between two modes' semirings (config keyword
    ``unique``)."""
    return synthesize_unique_morphism(src.semiring, dst.semiring)
