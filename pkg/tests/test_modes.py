"""Mode theories: construction, ordering, transport, and law validation."""

from __future__ import annotations

import pytest

from gradal.configs import shipped_mode_theories, shipped_semirings
from gradal.errors import CheckError, Code
from gradal.modes import (
    Mode,
    ModeTheory,
    cross_scale,
    mode_leq,
    mode_leq_vec,
    scale_into,
    validate_mode_theory,
)
from gradal.semiring import GradeValue, SemiringMorphism, mul, vec

THEORIES = shipped_mode_theories()
SEMIRINGS = shipped_semirings()
VAR = SEMIRINGS["variance"]


def _gv(sid: str, v) -> GradeValue:
    return GradeValue(SEMIRINGS[sid], v)


# ---------------------------------------------------------------------------
# every shipped theory satisfies every law, functoriality included


@pytest.mark.parametrize("tid", sorted(THEORIES))
def test_shipped_mode_theory_satisfies_all_laws(tid: str) -> None:
    assert validate_mode_theory(THEORIES[tid]) == []


def test_shipped_theory_shapes() -> None:
    rec = THEORIES["dmgl-recovery"]
    assert set(rec.modes) == {"L", "G"}
    assert rec.semiring_of("L").id == "nat-trivial-order"
    assert rec.semiring_of("G").id == "nat"
    assert not rec.weak("L") and rec.weak("G")
    assert mode_leq(rec, "L", "G") and not mode_leq(rec, "G", "L")

    lnld = THEORIES["lnld"]
    assert lnld.semiring_of("L").id == "none-one-tons/reflexive"
    assert lnld.semiring_of("U").id == "trivial"

    rel = THEORIES["relevance"]
    # same carrier, two order variants: ids must stay distinguishable
    assert rel.semiring_of("R").id != rel.semiring_of("W").id
    assert {rel.semiring_of(m).id for m in rel.modes} == {
        "none-one-tons/reflexive",
        "none-one-tons/0<=w",
    }

    stack = THEORIES["variance-stack"]
    assert mode_leq(stack, "L", "V")  # closure of L <= M <= V
    assert not mode_leq(stack, "V", "L")


def test_order_variant_semirings_really_differ() -> None:
    rel = THEORIES["relevance"]
    r, w = rel.semiring_of("R"), rel.semiring_of("W")
    from gradal.semiring import leq

    assert not leq(GradeValue(r, "0"), GradeValue(r, "w"))  # reflexive order
    assert leq(GradeValue(w, "0"), GradeValue(w, "w"))


def test_mode_leq_vec_checks_every_entry() -> None:
    stack = THEORIES["variance-stack"]
    assert mode_leq_vec(stack, "L", ["L", "M", "V"])
    assert not mode_leq_vec(stack, "M", ["L", "M"])
    assert mode_leq_vec(stack, "V", [])  # vacuous on the empty context


# ---------------------------------------------------------------------------
# grade transport along the order


def test_scale_into_diagonal_is_identity() -> None:
    for tid, th in THEORIES.items():
        for m in th.modes:
            s = th.semiring_of(m)
            for e in s.elements(bound=3):
                g = GradeValue(s, e)
                assert scale_into(th, m, g, m) == g, (tid, m, e)


def test_scale_into_recovery_theory_is_the_inclusion() -> None:
    rec = THEORIES["dmgl-recovery"]
    for n in range(5):
        got = scale_into(rec, "L", _gv("nat-trivial-order", n), "G")
        assert got == _gv("nat", n)


def test_scale_into_rejects_grades_of_the_wrong_mode() -> None:
    rec = THEORIES["dmgl-recovery"]
    with pytest.raises(CheckError) as e:
        scale_into(rec, "L", _gv("nat", 1), "G")
    assert e.value.code is Code.GRADE_MODE_MISMATCH


def test_cross_scale_is_pointwise_transport_then_multiply() -> None:
    stack = THEORIES["variance-stack"]
    r = GradeValue(stack.semiring_of("L"), 2)
    entry_modes = ["L", "M", "V"]
    d = vec(
        [
            GradeValue(stack.semiring_of("L"), 3),
            GradeValue(stack.semiring_of("M"), "1"),
            GradeValue(stack.semiring_of("V"), "vv"),
        ]
    )
    got = cross_scale(stack, "L", r, entry_modes, d)
    want = [mul(scale_into(stack, "L", r, m), g) for m, g in zip(entry_modes, d)]
    assert list(got) == want
    # spot values: 2 transported to none-one-tons is w; to variance is ^^
    assert got[0] == GradeValue(stack.semiring_of("L"), 6)
    assert got[1] == GradeValue(stack.semiring_of("M"), "w")
    assert got[2] == GradeValue(stack.semiring_of("V"), "vv")


def test_cross_scale_requires_the_scaling_mode_below_every_entry() -> None:
    stack = THEORIES["variance-stack"]
    r = GradeValue(stack.semiring_of("M"), "1")
    with pytest.raises(CheckError) as e:
        cross_scale(stack, "M", r, ["L"], vec([GradeValue(stack.semiring_of("L"), 1)]))
    assert e.value.code is Code.NO_MORPHISM


def test_cross_scale_length_and_entry_semiring_errors() -> None:
    rec = THEORIES["dmgl-recovery"]
    r = _gv("nat-trivial-order", 1)
    with pytest.raises(CheckError) as e:
        cross_scale(rec, "L", r, ["L", "G"], vec([_gv("nat-trivial-order", 1)]))
    assert e.value.code is Code.LENGTH_MISMATCH
    with pytest.raises(CheckError) as e:
        cross_scale(rec, "L", r, ["G"], vec([_gv("nat-trivial-order", 1)]))
    assert e.value.code is Code.GRADE_MODE_MISMATCH


# ---------------------------------------------------------------------------
# construction-time errors


def test_duplicate_mode_ids_are_rejected() -> None:
    with pytest.raises(CheckError) as e:
        ModeTheory(
            "dup",
            [Mode("A", VAR, True), Mode("A", VAR, True)],
            [],
            {},
        )
    assert e.value.code is Code.DUPLICATE_NAME


def test_order_over_unknown_modes_is_rejected() -> None:
    with pytest.raises(CheckError) as e:
        ModeTheory("unk", [Mode("A", VAR, True)], [("A", "B")], {})
    assert e.value.code is Code.UNKNOWN_MODE


def test_morphism_between_unrelated_modes_is_rejected() -> None:
    ident = _identity_endo()
    with pytest.raises(CheckError) as e:
        ModeTheory(
            "unrel",
            [Mode("A", VAR, True), Mode("B", VAR, True)],
            [],
            {("A", "B"): ident},
        )
    assert e.value.code is Code.NO_MORPHISM


def test_related_modes_without_a_derivable_morphism_are_rejected() -> None:
    trivial = SEMIRINGS["trivial"]
    with pytest.raises(CheckError) as e:
        ModeTheory(
            "nomap",
            [Mode("A", VAR, True), Mode("B", trivial, True)],
            [("A", "B")],
            {},
        )
    assert e.value.code is Code.NO_MORPHISM


# ---------------------------------------------------------------------------
# the validator catches each class of broken theory


def _identity_endo() -> SemiringMorphism:
    return SemiringMorphism(VAR, VAR, {e: e for e in VAR.elements()})


def _collapsing_endo() -> SemiringMorphism:
    # a second valid variance endomorphism: send both unreachable elements
    # to the covariant unit (checked against the morphism laws below)
    return SemiringMorphism(VAR, VAR, {"??": "??", "^^": "^^", "vv": "^^", "~~": "^^"})


def test_the_two_variance_endomorphisms_are_both_lawful() -> None:
    from gradal.semiring import validate_morphism

    assert validate_morphism(_identity_endo()) == []
    assert validate_morphism(_collapsing_endo()) == []


def test_validator_flags_functoriality_failure() -> None:
    # X <= Y <= Z with identity steps, but the declared direct map X -> Z
    # is the collapsing endomorphism: the two paths disagree on vv
    th = ModeTheory(
        "bad-funct",
        [Mode("X", VAR, True), Mode("Y", VAR, True), Mode("Z", VAR, True)],
        [("X", "Y"), ("Y", "Z")],
        {
            ("X", "Y"): _identity_endo(),
            ("Y", "Z"): _identity_endo(),
            ("X", "Z"): _collapsing_endo(),
        },
    )
    violations = validate_mode_theory(th)
    assert {v.law for v in violations} == {"functoriality"}
    witnessed = {w[3] for v in violations for w in [v.witness]}
    assert witnessed == {"vv", "~~"}


def test_validator_flags_weakening_that_drops_along_the_order() -> None:
    th = ModeTheory(
        "bad-weak",
        [Mode("X", VAR, True), Mode("Y", VAR, False)],
        [("X", "Y")],
        {("X", "Y"): _identity_endo()},
    )
    assert any(v.law == "weak-monotone" and v.witness == ("X", "Y")
               for v in validate_mode_theory(th))


def test_validator_flags_wrong_morphism_endpoints() -> None:
    nat = SEMIRINGS["nat"]
    th = ModeTheory(
        "bad-endpoints",
        [Mode("X", VAR, True), Mode("Y", VAR, True)],
        [("X", "Y")],
        {("X", "Y"): SemiringMorphism(nat, nat, None)},
    )
    assert any(v.law == "morphism-endpoints" for v in validate_mode_theory(th))


def test_validator_flags_unlawful_stored_morphism() -> None:
    swapped = SemiringMorphism(VAR, VAR, {"??": "^^", "^^": "??", "vv": "vv", "~~": "~~"})
    th = ModeTheory(
        "bad-table",
        [Mode("X", VAR, True), Mode("Y", VAR, True)],
        [("X", "Y")],
        {("X", "Y"): swapped},
    )
    laws = {v.law for v in validate_mode_theory(th)}
    assert any(law.endswith("@X->Y") for law in laws)


def test_composite_morphisms_are_filled_in_along_paths() -> None:
    stack = THEORIES["variance-stack"]
    f = stack.morphism("L", "V")
    g = stack.morphism("M", "V")
    h = stack.morphism("L", "M")
    for n in range(4):
        x = GradeValue(stack.semiring_of("L"), n)
        assert f.apply(x) == g.apply(h.apply(x))
