"""Term representation: substitution, shifting, scoping, alpha-equivalence.

The heavy lifting is cross-checked against ``oracles.to_named`` /
``oracles.named_subst``: a named-variable representation where substitution
is the capture-free textbook definition, so any index bookkeeping bug in the
de Bruijn implementation shows up as a disagreement.
"""

from __future__ import annotations

import dataclasses
import itertools
import random

import pytest

from gradal.configs import shipped_mode_theories, shipped_semirings
from gradal.syntax import (
    App,
    Ascribe,
    GradeValue,
    Inl,
    Lam,
    LVar,
    Pair,
    TensorPair,
    UnitJ,
    UnitJType,
    Var,
    Zone,
    alpha_eq,
    erase_ascriptions,
    free_var_occurrences,
    free_vars,
    shift_term,
    subst_glad_suffix,
    subst_graded_suffix,
    subst_term,
    subterms,
    well_scoped,
)

from oracles import ScopedTermGen, from_named, named_subst, to_named

NAT = shipped_semirings()["nat"]
LNLD = shipped_mode_theories()["lnld"]
LNLD_MODES = {m: LNLD.semiring_of(m) for m in LNLD.modes}


def _gen(fragment: str, seed: int) -> ScopedTermGen:
    modes = LNLD_MODES if fragment == "glad" else None
    return ScopedTermGen(random.Random(seed), NAT, fragment, modes)


def _gnames(n: int) -> tuple[str, ...]:
    return tuple(f"fg{i}" for i in range(n))


def _lnames(n: int) -> tuple[str, ...]:
    return tuple(f"fl{i}" for i in range(n))


# ---------------------------------------------------------------------------
# substitution vs. the named oracle


@pytest.mark.parametrize("fragment", ["graded", "mixed", "glad"])
def test_graded_subst_matches_named_oracle(fragment: str) -> None:
    for seed in range(150):
        rng = random.Random(f"gsubst:{fragment}:{seed}")
        gen = _gen(fragment, rng.random())
        g = rng.randint(1, 4)
        l = rng.randint(0, 3) if fragment == "mixed" else 0
        k = rng.randrange(g)
        t = gen.term(3, g, l)
        # the replacement lives outside slot k: only the outer graded
        # entries are visible to it, while the linear zone is shared with t
        s = gen.term(2, g - 1 - k, l)

        genv, lenv = _gnames(g), _lnames(l)
        cut_pos = g - 1 - k
        counter = itertools.count()
        named_t = to_named(t, genv, lenv, counter)
        named_s = to_named(s, genv[:cut_pos], lenv, counter)
        expected = from_named(
            named_subst(named_t, ("gvar", genv[cut_pos]), named_s),
            genv[:cut_pos] + genv[cut_pos + 1 :],
            lenv,
        )
        assert subst_term(s, k, t) == expected, (fragment, seed)


def test_linear_subst_matches_named_oracle() -> None:
    for seed in range(150):
        rng = random.Random(f"lsubst:{seed}")
        gen = _gen("mixed", rng.random())
        g = rng.randint(0, 3)
        l = rng.randint(1, 4)
        k = rng.randrange(l)
        t = gen.term(3, g, l)
        s = gen.term(2, g, l - 1 - k)

        genv, lenv = _gnames(g), _lnames(l)
        cut_pos = l - 1 - k
        counter = itertools.count()
        named_t = to_named(t, genv, lenv, counter)
        named_s = to_named(s, genv, lenv[:cut_pos], counter)
        expected = from_named(
            named_subst(named_t, ("lvar", lenv[cut_pos]), named_s),
            genv,
            lenv[:cut_pos] + lenv[cut_pos + 1 :],
        )
        assert subst_term(s, k, t, zone=Zone.LINEAR) == expected, seed


def test_linear_splice_subst_matches_named_oracle() -> None:
    # a linear cut may splice the replacement's own linear zone into the
    # slot; the spliced entries take the cut entry's place in the context
    for seed in range(150):
        rng = random.Random(f"splice:{seed}")
        gen = _gen("mixed", rng.random())
        g = rng.randint(0, 3)
        l = rng.randint(1, 4)
        k = rng.randrange(l)
        width = rng.randint(0, 3)
        t = gen.term(3, g, l)
        s = gen.term(2, g, width)

        genv, lenv = _gnames(g), _lnames(l)
        spliced = tuple(f"sp{i}" for i in range(width))
        cut_pos = l - 1 - k
        counter = itertools.count()
        named_t = to_named(t, genv, lenv, counter)
        named_s = to_named(s, genv, spliced, counter)
        expected = from_named(
            named_subst(named_t, ("lvar", lenv[cut_pos]), named_s),
            genv,
            lenv[:cut_pos] + spliced + lenv[cut_pos + 1 :],
        )
        actual = subst_term(s, k, t, zone=Zone.LINEAR, splice_width=width)
        assert actual == expected, seed


@pytest.mark.parametrize("fragment", ["graded", "mixed", "glad"])
def test_subst_into_weakened_term_is_identity(fragment: str) -> None:
    for seed in range(60):
        rng = random.Random(f"weak-id:{fragment}:{seed}")
        gen = _gen(fragment, rng.random())
        g, l = rng.randint(0, 3), rng.randint(0, 3) if fragment == "mixed" else 0
        t = gen.term(3, g, l)
        s = gen.term(1, g, l)
        assert subst_term(s, 0, shift_term(t, g_by=1)) == t
        if fragment == "mixed":
            assert subst_term(s, 0, shift_term(t, l_by=1), zone=Zone.LINEAR) == t


# ---------------------------------------------------------------------------
# shifting vs. named insertion


@pytest.mark.parametrize("fragment", ["graded", "mixed", "glad"])
def test_shift_matches_named_insertion(fragment: str) -> None:
    # shifting by n at a cut is exactly "insert n unused names at that
    # context position": the named forms must coincide verbatim (the fresh
    # binder-name counters run over identical tree shapes)
    for seed in range(120):
        rng = random.Random(f"shift:{fragment}:{seed}")
        gen = _gen(fragment, rng.random())
        g = rng.randint(0, 4)
        l = rng.randint(0, 3) if fragment == "mixed" else 0
        t = gen.term(3, g, l)
        g_by, g_cut = rng.randint(0, 2), rng.randint(0, g)
        l_by, l_cut = (rng.randint(0, 2), rng.randint(0, l)) if l else (0, 0)

        genv, lenv = _gnames(g), _lnames(l)
        g_pos, l_pos = g - g_cut, l - l_cut
        genv_ins = genv[:g_pos] + tuple(f"ng{i}" for i in range(g_by)) + genv[g_pos:]
        lenv_ins = lenv[:l_pos] + tuple(f"nl{i}" for i in range(l_by)) + lenv[l_pos:]
        shifted = shift_term(t, g_by=g_by, l_by=l_by, g_cut=g_cut, l_cut=l_cut)
        assert to_named(shifted, genv_ins, lenv_ins) == to_named(t, genv, lenv), seed


def test_shift_by_zero_is_identity() -> None:
    for seed in range(40):
        gen = _gen("mixed", seed)
        t = gen.term(3, 2, 2)
        assert shift_term(t) == t
        assert shift_term(t, g_by=0, l_by=0, g_cut=1, l_cut=1) == t


def test_shift_composes() -> None:
    for seed in range(40):
        gen = _gen("graded", f"compose:{seed}")
        t = gen.term(3, 3, 0)
        once_twice = shift_term(shift_term(t, g_by=1), g_by=2)
        assert once_twice == shift_term(t, g_by=3)


# ---------------------------------------------------------------------------
# free variables and scoping


def _named_var_names(named: tuple, kind: str) -> list[str]:
    if named[0] in ("gvar", "lvar"):
        return [named[1]] if named[0] == kind else []
    out: list[str] = []
    for child in named[3].values():
        out.extend(_named_var_names(child, kind))
    return out


@pytest.mark.parametrize("fragment", ["graded", "mixed", "glad"])
def test_free_vars_matches_named_oracle(fragment: str) -> None:
    for seed in range(100):
        rng = random.Random(f"fv:{fragment}:{seed}")
        gen = _gen(fragment, rng.random())
        g = rng.randint(0, 4)
        l = rng.randint(0, 3) if fragment == "mixed" else 0
        t = gen.term(3, g, l)
        genv, lenv = _gnames(g), _lnames(l)
        named = to_named(t, genv, lenv)
        # only names from the free environments can appear free: binder
        # names are globally fresh, so membership is a pure name lookup
        want_g = {g - 1 - genv.index(n) for n in _named_var_names(named, "gvar") if n in genv}
        want_l = {l - 1 - lenv.index(n) for n in _named_var_names(named, "lvar") if n in lenv}
        assert free_vars(t) == want_g
        assert free_vars(t, zone=Zone.LINEAR) == want_l
        assert well_scoped(t, g, l)
        if want_g:
            assert not well_scoped(t, max(want_g), l)
        if want_l:
            assert not well_scoped(t, g, max(want_l))


def test_free_var_occurrences_order_and_multiplicity() -> None:
    t = App(Pair(Var(2), Var(0)), Var(2))
    assert free_var_occurrences(t) == [2, 0, 2]
    assert free_var_occurrences(Lam("x", App(Var(0), Var(1)))) == [0]
    assert free_var_occurrences(TensorPair(LVar(1), LVar(1)), zone=Zone.LINEAR) == [1, 1]


def test_free_vars_sees_through_binders() -> None:
    # an occurrence under one binder at index 1 is free var 0 at the root
    assert free_vars(Lam("x", Var(1))) == {0}
    assert free_vars(Lam("x", Var(0))) == set()


# ---------------------------------------------------------------------------
# alpha-equivalence and ascription erasure


def test_alpha_eq_ignores_binder_name_hints() -> None:
    assert alpha_eq(Lam("x", Var(0)), Lam("y", Var(0)))
    for seed in range(40):
        gen = _gen("mixed", f"alpha:{seed}")
        t = gen.term(3, 2, 2)
        assert alpha_eq(t, _rename_binders(t))


def test_alpha_eq_distinguishes_structure_and_grades() -> None:
    two = GradeValue(NAT, 2)
    one_ = GradeValue(NAT, 1)
    assert not alpha_eq(Lam("x", Var(0)), Lam("x", UnitJ()))
    assert not alpha_eq(Inl(UnitJ()), UnitJ())
    from gradal.syntax import GradedArrow

    a = GradedArrow(one_, "x", UnitJType(), UnitJType())
    b = GradedArrow(two, "x", UnitJType(), UnitJType())
    assert not alpha_eq(a, b)
    assert alpha_eq(a, GradedArrow(one_, "zzz", UnitJType(), UnitJType()))


def _rename_binders(t):
    if isinstance(t, (Var, LVar)):
        return t
    kwargs = {}
    for f in dataclasses.fields(t):
        v = getattr(t, f.name)
        if isinstance(v, (Var, LVar)) or hasattr(v, "__dataclass_fields__"):
            kwargs[f.name] = _rename_binders(v)
        elif f.name in ("name", "name1", "name2", "gname", "lname"):
            kwargs[f.name] = "renamed"
        else:
            kwargs[f.name] = v
    return type(t)(**kwargs)


def test_erase_ascriptions_removes_every_ascription() -> None:
    for seed in range(60):
        gen = _gen("mixed", f"erase:{seed}")
        t = gen.term(4, 2, 2)
        erased = erase_ascriptions(t)
        assert not any(isinstance(s, Ascribe) for s in subterms(erased))
        assert erase_ascriptions(erased) == erased
    assert erase_ascriptions(Ascribe(Ascribe(UnitJ(), UnitJType()), UnitJType())) == UnitJ()


def test_subterms_includes_root_and_counts() -> None:
    t = App(Pair(Var(0), UnitJ()), Lam("x", Var(0)))
    got = list(subterms(t))
    assert got[0] == t
    assert len(got) == 6  # App, Pair, Var, UnitJ, Lam, Var


# ---------------------------------------------------------------------------
# context-suffix substitution helpers


def test_subst_graded_suffix_matches_pointwise_substitution() -> None:
    # the k-th suffix entry's type sees the substituted variable at index k
    for seed in range(60):
        rng = random.Random(f"gsuffix:{seed}")
        gen = _gen("graded", rng.random())
        t0 = gen.term(2, 2, 0)
        entries = tuple(
            (f"e{i}", gen.term(2, 2 + 1 + i, 0)) for i in range(rng.randint(0, 3))
        )
        got = subst_graded_suffix(entries, t0)
        assert len(got) == len(entries)
        for k, ((name, type_), (gname, gtype)) in enumerate(zip(entries, got)):
            assert gname == name
            assert gtype == subst_term(t0, k, type_)


def test_subst_glad_suffix_matches_pointwise_substitution() -> None:
    for seed in range(60):
        rng = random.Random(f"dsuffix:{seed}")
        gen = _gen("glad", rng.random())
        t0 = gen.term(2, 2, 0)
        entries = tuple(
            (f"e{i}", gen.term(2, 2 + 1 + i, 0), rng.choice(sorted(LNLD_MODES)))
            for i in range(rng.randint(0, 3))
        )
        got = subst_glad_suffix(entries, t0)
        assert len(got) == len(entries)
        for k, ((name, type_, mode), (gname, gtype, gmode)) in enumerate(zip(entries, got)):
            assert (gname, gmode) == (name, mode)
            assert gtype == subst_term(t0, k, type_)
