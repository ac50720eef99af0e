"""Semiring laws, grade values/vectors, and morphism synthesis.

Finite operation tables and orders are cross-checked against independent
oracles (sign arithmetic for variance, brute-force glb/transitive closure,
iterated addition for canonical morphisms) built in ``oracles.py``.
"""

from __future__ import annotations

import itertools
from importlib import resources

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gradal.configs import shipped_semirings
from gradal.errors import CheckError, Code
from gradal.semiring import (
    GradeValue,
    GradeVector,
    SemiringSpec,
    add,
    apply_morphism,
    leq,
    lub,
    mul,
    one,
    synthesize_unique_morphism,
    unit_vector,
    validate_morphism,
    validate_semiring,
    vec,
    vec_add,
    vec_leq,
    vec_scale,
    zero,
    zeros,
)

from oracles import (
    declared_order_pairs,
    nat_image_oracle,
    variance_add_oracle,
    variance_mul_oracle,
    warshall_closure,
)

SHIPPED = shipped_semirings()
NAT = SHIPPED["nat"]
NAT_TRIVIAL = SHIPPED["nat-trivial-order"]
NOO = SHIPPED["none-one-tons"]
VARIANCE = SHIPPED["variance"]
BOOLEAN = SHIPPED["boolean"]
TRIVIAL = SHIPPED["trivial"]


def _config_text(name: str) -> str:
    return resources.files("gradal.configs").joinpath(name).read_text()


def _gv(s: SemiringSpec, v) -> GradeValue:
    return GradeValue(s, v)


# ---------------------------------------------------------------------------
# law validation of every shipped semiring


@pytest.mark.parametrize("sid", sorted(SHIPPED))
def test_shipped_semiring_satisfies_all_laws(sid: str) -> None:
    assert validate_semiring(SHIPPED[sid]) == []


def test_nat_law_check_covers_a_thousand_random_triples() -> None:
    # the naturals cannot be checked exhaustively; the validator documents
    # a fixed-seed random sample large enough to count as real evidence
    from gradal.semiring import NAT_LAW_SAMPLE_COUNT

    assert NAT_LAW_SAMPLE_COUNT >= 1000


@given(st.integers(0, 10**6), st.integers(0, 10**6), st.integers(0, 10**6))
def test_nat_operations_agree_with_integer_arithmetic(a: int, b: int, c: int) -> None:
    ga, gb = _gv(NAT, a), _gv(NAT, b)
    assert add(ga, gb).value == a + b
    assert mul(ga, gb).value == a * b
    assert leq(ga, gb) == (a <= b)
    assert leq(_gv(NAT_TRIVIAL, a), _gv(NAT_TRIVIAL, b)) == (a == b)
    assert add(add(ga, gb), _gv(NAT, c)) == add(ga, add(gb, _gv(NAT, c)))


# ---------------------------------------------------------------------------
# pinned table entries and oracle cross-checks


def test_none_one_tons_pins_the_linearity_collapsing_sums() -> None:
    one_ = _gv(NOO, "1")
    w = _gv(NOO, "w")
    assert add(one_, one_) == w
    assert add(one_, w) == w
    assert add(w, one_) == w
    assert mul(one_, one_) == one_
    assert leq(_gv(NOO, "0"), w) and leq(one_, w)
    assert not leq(_gv(NOO, "0"), one_)
    assert not leq(one_, _gv(NOO, "0"))


def test_variance_pins_sign_composition() -> None:
    vv = _gv(VARIANCE, "vv")
    tilde = _gv(VARIANCE, "~~")
    assert mul(vv, vv) == _gv(VARIANCE, "^^")
    assert mul(tilde, vv) == tilde


def test_variance_multiplication_matches_sign_oracle() -> None:
    for a, b in itertools.product(VARIANCE.elements(), repeat=2):
        got = mul(_gv(VARIANCE, a), _gv(VARIANCE, b)).value
        assert got == variance_mul_oracle(a, b), (a, b)


def test_variance_addition_is_greatest_lower_bound() -> None:
    elements = VARIANCE.elements()
    order = {(a, b) for a in elements for b in elements
             if leq(_gv(VARIANCE, a), _gv(VARIANCE, b))}
    for a, b in itertools.product(elements, repeat=2):
        got = add(_gv(VARIANCE, a), _gv(VARIANCE, b)).value
        assert got == variance_add_oracle(a, b, order, elements), (a, b)


@pytest.mark.parametrize("name", ["none-one-tons", "variance", "boolean", "trivial"])
def test_finite_order_is_the_closure_of_the_declared_pairs(name: str) -> None:
    elements, declared = declared_order_pairs(_config_text(f"{name}.sr"))
    want = warshall_closure(elements, declared)
    s = SHIPPED[name]
    assert elements == s.elements()
    got = {(a, b) for a in elements for b in elements if leq(_gv(s, a), _gv(s, b))}
    assert got == want


# ---------------------------------------------------------------------------
# grade values: identity, hashing, element checking


def test_grade_value_equality_is_by_semiring_id_and_value() -> None:
    assert _gv(NAT, 3) == _gv(NAT, 3)
    assert _gv(NAT, 3) != _gv(NAT, 4)
    assert _gv(NAT, 1) != _gv(NAT_TRIVIAL, 1)
    assert _gv(NOO, "1") != _gv(BOOLEAN, "1")
    assert len({_gv(NAT, 2), _gv(NAT, 2), _gv(NAT, 5)}) == 2
    assert _gv(NAT, 0) != 0


@pytest.mark.parametrize(
    "s,bad",
    [
        (NAT, -1),
        (NAT, "1"),
        (NAT, True),
        (NOO, "2"),
        (NOO, 1),
        (VARIANCE, "up"),
    ],
)
def test_grade_value_rejects_non_elements(s: SemiringSpec, bad) -> None:
    with pytest.raises(CheckError) as e:
        GradeValue(s, bad)
    assert e.value.code is Code.UNKNOWN_ELEMENT


def test_operations_reject_mixed_semirings() -> None:
    a, b = _gv(NAT, 1), _gv(NOO, "1")
    for op in (add, mul, leq, lub):
        with pytest.raises(CheckError) as e:
            op(a, b)
        assert e.value.code is Code.SEMIRING_MISMATCH


# ---------------------------------------------------------------------------
# least upper bounds


def test_lub_matches_brute_force_on_every_finite_semiring() -> None:
    for s in (NOO, VARIANCE, BOOLEAN, TRIVIAL):
        elements = s.elements()
        for a, b in itertools.product(elements, repeat=2):
            ga, gb = _gv(s, a), _gv(s, b)
            ubs = [c for c in elements if leq(ga, _gv(s, c)) and leq(gb, _gv(s, c))]
            least = [c for c in ubs if all(leq(_gv(s, c), _gv(s, d)) for d in ubs)]
            got = lub(ga, gb)
            if least:
                assert got == _gv(s, least[0]), (s.id, a, b)
            else:
                assert got is None, (s.id, a, b)


def test_lub_on_the_naturals() -> None:
    assert lub(_gv(NAT, 3), _gv(NAT, 5)) == _gv(NAT, 5)
    assert lub(_gv(NAT_TRIVIAL, 3), _gv(NAT_TRIVIAL, 3)) == _gv(NAT_TRIVIAL, 3)
    assert lub(_gv(NAT_TRIVIAL, 3), _gv(NAT_TRIVIAL, 5)) is None


def test_lub_of_incomparable_linear_grades_exists_via_tons() -> None:
    # 0 and 1 are incomparable in none-one-tons but share the upper bound w
    assert lub(_gv(NOO, "0"), _gv(NOO, "1")) == _gv(NOO, "w")


# ---------------------------------------------------------------------------
# grade vectors


@given(st.lists(st.integers(0, 50), max_size=6), st.integers(0, 50))
def test_vector_operations_are_pointwise(values: list[int], r: int) -> None:
    d = vec(_gv(NAT, v) for v in values)
    e = vec(_gv(NAT, v + 1) for v in values)
    assert list(vec_add(d, e)) == [_gv(NAT, 2 * v + 1) for v in values]
    assert list(vec_scale(_gv(NAT, r), d)) == [_gv(NAT, r * v) for v in values]
    assert vec_leq(d, e)
    assert vec_leq(e, d) == (len(values) == 0)


def test_vector_length_mismatch_is_reported() -> None:
    d1, d2 = zeros(NAT, 2), zeros(NAT, 3)
    for op in (vec_add, vec_leq):
        with pytest.raises(CheckError) as e:
            op(d1, d2)
        assert e.value.code is Code.LENGTH_MISMATCH


def test_vector_comparison_requires_positionwise_same_semiring() -> None:
    d1 = vec([_gv(NAT, 0)])
    d2 = vec([_gv(NOO, "0")])
    with pytest.raises(CheckError) as e:
        vec_leq(d1, d2)
    assert e.value.code is Code.SEMIRING_MISMATCH


def test_zeros_and_unit_vector_shapes() -> None:
    assert list(zeros(NOO, 3)) == [_gv(NOO, "0")] * 3
    u = unit_vector(NAT, 4, 1)
    assert [g.value for g in u] == [0, 1, 0, 0]
    assert len(GradeVector(())) == 0
    assert vec_leq(GradeVector(()), GradeVector(()))


# ---------------------------------------------------------------------------
# canonical morphisms


def test_nat_morphism_is_iterated_addition_of_one() -> None:
    for target in (NOO, BOOLEAN, VARIANCE, TRIVIAL, NAT_TRIVIAL):
        m = synthesize_unique_morphism(NAT, target)
        for n in range(7):
            assert m.apply(_gv(NAT, n)) == nat_image_oracle(target, n), (target.id, n)


def test_morphism_monotonicity_depends_on_the_source_order() -> None:
    # out of the discretely ordered naturals every canonical map is
    # monotone (the source order is equality); out of the usually ordered
    # naturals it is monotone only when the images stay comparable
    for target in (NOO, BOOLEAN, VARIANCE, TRIVIAL, NAT):
        m = synthesize_unique_morphism(NAT_TRIVIAL, target)
        assert validate_morphism(m) == [], target.id
    for target in (BOOLEAN, TRIVIAL):
        assert validate_morphism(synthesize_unique_morphism(NAT, target)) == []
    # 0 <= 1 in nat, but their images 0 and 1 are incomparable here
    bad = validate_morphism(synthesize_unique_morphism(NAT, NOO))
    assert {v.law for v in bad} == {"morphism-monotone"}


def test_nat_to_none_one_tons_saturates_at_tons() -> None:
    m = synthesize_unique_morphism(NAT, NOO)
    assert m.apply(_gv(NAT, 0)).value == "0"
    assert m.apply(_gv(NAT, 1)).value == "1"
    assert m.apply(_gv(NAT, 2)).value == "w"
    assert m.apply(_gv(NAT, 41)).value == "w"


def test_finite_source_morphism_is_iterated_addition_of_one() -> None:
    m = synthesize_unique_morphism(NOO, TRIVIAL)
    for e in NOO.elements():
        assert m.apply(_gv(NOO, e)) == _gv(TRIVIAL, "0")
    assert validate_morphism(m) == []


def test_variance_has_no_canonical_morphism_out() -> None:
    # sums of the covariant unit only ever reach {zero, one}; the other two
    # elements are unreachable, so no canonical morphism can exist
    with pytest.raises(CheckError) as e:
        synthesize_unique_morphism(VARIANCE, TRIVIAL)
    assert e.value.code is Code.NO_MORPHISM
    assert set(e.value.payload["uncovered"]) == {"~~", "vv"}


def test_morphism_rejects_grades_from_the_wrong_semiring() -> None:
    m = synthesize_unique_morphism(NAT, NOO)
    with pytest.raises(CheckError) as e:
        apply_morphism(m, _gv(BOOLEAN, "1"))
    assert e.value.code is Code.SEMIRING_MISMATCH


# ---------------------------------------------------------------------------
# the validator really catches broken structures


def _finite(id: str, *, add_t, mul_t, leq_p=(), elements=("0", "1"), zero="0", one="1") -> SemiringSpec:
    return SemiringSpec(
        id, carrier=elements, zero=zero, one=one,
        add_table=add_t, mul_table=mul_t, leq_pairs=leq_p,
    )


def _bool_tables():
    add_t = {(a, b): ("1" if "1" in (a, b) else "0") for a in "01" for b in "01"}
    mul_t = {(a, b): ("1" if (a, b) == ("1", "1") else "0") for a in "01" for b in "01"}
    return add_t, mul_t


def test_validator_flags_broken_commutativity() -> None:
    add_t, mul_t = _bool_tables()
    add_t[("1", "0")] = "0"  # now 1+0 != 0+1 and 1+0 != 1
    bad = _finite("bad-comm", add_t=add_t, mul_t=mul_t)
    laws = {v.law for v in validate_semiring(bad)}
    assert "add-comm" in laws
    assert "add-zero" in laws


def test_validator_flags_missing_table_entries() -> None:
    add_t, mul_t = _bool_tables()
    del mul_t[("1", "1")]
    bad = _finite("bad-total", add_t=add_t, mul_t=mul_t)
    laws = {v.law for v in validate_semiring(bad)}
    assert laws == {"mul-total"}


def test_validator_flags_non_monotone_order() -> None:
    # declaring 1 <= 0 in none-one-tons breaks add-monotonicity:
    # 1 + 1 = w but 0 + 1 = 1, and w is not below 1
    bad = SemiringSpec(
        "bad-order", carrier=NOO.carrier, zero="0", one="1",
        add_table=NOO.add_table, mul_table=NOO.mul_table,
        leq_pairs=[("0", "w"), ("1", "w"), ("1", "0")],
    )
    laws = {v.law for v in validate_semiring(bad)}
    assert "add-monotone" in laws


def test_validator_flags_zero_annihilation_failure() -> None:
    add_t, mul_t = _bool_tables()
    mul_t[("0", "1")] = "1"
    bad = _finite("bad-zero", add_t=add_t, mul_t=mul_t)
    laws = {v.law for v in validate_semiring(bad)}
    assert "mul-zero-left" in laws


def test_validator_flags_broken_morphism_table() -> None:
    m = synthesize_unique_morphism(NOO, TRIVIAL)
    good = validate_morphism(m)
    assert good == []
    broken = type(m)(NOO, BOOLEAN, {"0": "0", "1": "1", "w": "0"})
    laws = {v.law for v in validate_morphism(broken)}
    assert laws  # w = 1+1 must map to 1+1 = 1, not 0
