"""Preordered semirings, grade values/vectors, and semiring morphisms.

A grade semiring is ``(R, 0, 1, +, *, <=)`` where ``+`` and ``*`` are monotone
in both arguments with respect to the preorder ``<=``.  Carriers are either
the built-in naturals or a finite set of named elements with explicit
operation tables.  The preorder of a finite carrier is stored reflexively and
transitively closed; the naturals ship with either the usual order or the
trivial (discrete) one.

Grade values carry their semiring, so all operations are self-contained and
mixing semirings is detected structurally (``SemiringMismatch``).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import CheckError, Code

# Seed for the documented randomized law sample on the (infinite) naturals.
NAT_LAW_SAMPLE_SEED = 1729
NAT_LAW_SAMPLE_COUNT = 1000
NAT_LAW_SAMPLE_BOUND = 50

Element = int | str


def _closure(names: Sequence[str], pairs: Iterable[tuple[str, str]]) -> frozenset[tuple[str, str]]:
    """Reflexive-transitive closure of an order relation on ``names``."""
    rel: set[tuple[str, str]] = {(n, n) for n in names}
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


class SemiringSpec:
    """A preordered semiring instance.

    ``carrier`` is ``None`` for the built-in naturals, otherwise the ordered
    tuple of element names.  For finite carriers ``add_table``/``mul_table``
    are total mappings and ``leq_pairs`` is the closed preorder; for the
    naturals ``nat_order`` selects ``"usual"`` or ``"trivial"``.
    """

    def __init__(
        self,
        id: str,
        *,
        carrier: tuple[str, ...] | None,
        zero: Element,
        one: Element,
        add_table: dict[tuple[str, str], str] | None = None,
        mul_table: dict[tuple[str, str], str] | None = None,
        leq_pairs: Iterable[tuple[str, str]] = (),
        nat_order: str = "usual",
    ) -> None:
        self.id = id
        self.carrier = carrier
        self.zero = zero
        self.one = one
        self.add_table = dict(add_table) if add_table is not None else None
        self.mul_table = dict(mul_table) if mul_table is not None else None
        self.nat_order = nat_order
        if carrier is not None:
            self.leq_pairs: frozenset[tuple[str, str]] = _closure(carrier, leq_pairs)
        else:
            self.leq_pairs = frozenset()

    @property
    def is_nat(self) -> bool:
        return self.carrier is None

    def elements(self, bound: int = 4) -> tuple[Element, ...]:
        """The carrier, or an initial segment of the naturals for sampling."""
        if self.carrier is None:
            return tuple(range(bound))
        return self.carrier

    def has_element(self, value: Element) -> bool:
        if self.carrier is None:
            return isinstance(value, int) and not isinstance(value, bool) and value >= 0
        return isinstance(value, str) and value in self.carrier

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"SemiringSpec({self.id!r})"


@dataclass(frozen=True, eq=False)
class GradeValue:
    """An element of a specific semiring."""

    semiring: SemiringSpec
    value: Element

    def __post_init__(self) -> None:
        if not self.semiring.has_element(self.value):
            raise CheckError(
                Code.UNKNOWN_ELEMENT,
                f"{self.value!r} is not an element of semiring '{self.semiring.id}'",
                payload={"semiring": self.semiring.id, "value": self.value},
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GradeValue):
            return NotImplemented
        return self.semiring.id == other.semiring.id and self.value == other.value

    def __hash__(self) -> int:
        return hash((self.semiring.id, self.value))

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"{self.value}:{self.semiring.id}"


@dataclass(frozen=True, eq=False)
class GradeVector:
    """A tuple of grade values; entries may live in different semirings
    (needed for many-mode contexts), and the vector operations enforce
    positionwise agreement."""

    entries: tuple[GradeValue, ...]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GradeVector):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self) -> int:
        return hash(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[GradeValue]:
        return iter(self.entries)

    def __getitem__(self, ix: int) -> GradeValue:
        return self.entries[ix]

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return "[" + ", ".join(repr(e) for e in self.entries) + "]"


def _require_same(a: GradeValue, b: GradeValue, what: str) -> None:
    if a.semiring.id != b.semiring.id:
        raise CheckError(
            Code.SEMIRING_MISMATCH,
            f"{what} over distinct semirings '{a.semiring.id}' and '{b.semiring.id}'",
            payload={"left": a.semiring.id, "right": b.semiring.id},
        )


def add(a: GradeValue, b: GradeValue) -> GradeValue:
    """Semiring addition."""
    _require_same(a, b, "addition")
    s = a.semiring
    if s.is_nat:
        return GradeValue(s, int(a.value) + int(b.value))
    assert s.add_table is not None
    return GradeValue(s, s.add_table[(str(a.value), str(b.value))])


def mul(a: GradeValue, b: GradeValue) -> GradeValue:
    """Semiring multiplication."""
    _require_same(a, b, "multiplication")
    s = a.semiring
    if s.is_nat:
        return GradeValue(s, int(a.value) * int(b.value))
    assert s.mul_table is not None
    return GradeValue(s, s.mul_table[(str(a.value), str(b.value))])


def leq(a: GradeValue, b: GradeValue) -> bool:
    """The semiring preorder."""
    _require_same(a, b, "order comparison")
    s = a.semiring
    if s.is_nat:
        if s.nat_order == "usual":
            return int(a.value) <= int(b.value)
        return a.value == b.value
    return (str(a.value), str(b.value)) in s.leq_pairs


def lub(a: GradeValue, b: GradeValue) -> GradeValue | None:
    """Pointwise least upper bound, when the preorder has one.

    Finite carriers are searched exhaustively; the naturals use ``max`` under
    the usual order and equality under the trivial one.  ``None`` when no
    least upper bound exists.
    """
    _require_same(a, b, "least upper bound")
    s = a.semiring
    if s.is_nat:
        if s.nat_order == "usual":
            return GradeValue(s, max(int(a.value), int(b.value)))
        return a if a == b else None
    assert s.carrier is not None
    ubs = [GradeValue(s, c) for c in s.carrier if leq(a, GradeValue(s, c)) and leq(b, GradeValue(s, c))]
    for cand in ubs:
        if all(leq(cand, other) for other in ubs):
            return cand
    return None


def zero(s: SemiringSpec) -> GradeValue:
    return GradeValue(s, s.zero)


def one(s: SemiringSpec) -> GradeValue:
    return GradeValue(s, s.one)


def vec(entries: Iterable[GradeValue]) -> GradeVector:
    return GradeVector(tuple(entries))


def zeros(s: SemiringSpec, n: int) -> GradeVector:
    return GradeVector(tuple(zero(s) for _ in range(n)))


def unit_vector(s: SemiringSpec, n: int, position: int) -> GradeVector:
    """The vector that is 1 at ``position`` (0-based, from the left) and 0
    elsewhere."""
    return GradeVector(tuple(one(s) if i == position else zero(s) for i in range(n)))


def vec_add(d1: GradeVector, d2: GradeVector) -> GradeVector:
    """Pointwise vector addition (same length, positionwise same semiring)."""
    if len(d1) != len(d2):
        raise CheckError(
            Code.LENGTH_MISMATCH,
            f"vector addition of lengths {len(d1)} and {len(d2)}",
            payload={"left": len(d1), "right": len(d2)},
        )
    return GradeVector(tuple(add(a, b) for a, b in zip(d1, d2)))


def vec_scale(r: GradeValue, d: GradeVector) -> GradeVector:
    """Left-scale every entry by ``r`` (single-semiring scaling)."""
    return GradeVector(tuple(mul(r, e) for e in d))


def vec_leq(d1: GradeVector, d2: GradeVector) -> bool:
    """Pointwise preorder; demands equal length and positionwise same
    semiring (subusage across semirings/modes is forbidden)."""
    if len(d1) != len(d2):
        raise CheckError(
            Code.LENGTH_MISMATCH,
            f"vector comparison of lengths {len(d1)} and {len(d2)}",
            payload={"left": len(d1), "right": len(d2)},
        )
    return all(leq(a, b) for a, b in zip(d1, d2))


class SemiringMorphism:
    """A structure- and order-preserving map between semirings.

    ``table`` maps finite source elements; for the naturals as source the map
    is the canonical one defined by iterated addition of the target's 1
    (memoized in ``_cache``).  A morphism built with ``table=None`` is the
    canonical ("unique") one; see :func:`synthesize_unique_morphism`.
    """

    def __init__(
        self,
        source: SemiringSpec,
        target: SemiringSpec,
        table: dict[Element, Element] | None,
    ) -> None:
        self.source = source
        self.target = target
        self.table = table
        self._cache: dict[int, GradeValue] = {}

    def apply(self, g: GradeValue) -> GradeValue:
        if g.semiring.id != self.source.id:
            raise CheckError(
                Code.SEMIRING_MISMATCH,
                f"morphism from '{self.source.id}' applied to a '{g.semiring.id}' grade",
                payload={"expected": self.source.id, "actual": g.semiring.id},
            )
        if self.table is not None:
            return GradeValue(self.target, self.table[g.value])
        # canonical map out of the naturals: n |-> n-fold sum of 1.
        n = int(g.value)
        if n in self._cache:
            return self._cache[n]
        start = max(self._cache) if self._cache else 0
        acc = self._cache.get(start, zero(self.target))
        for k in range(start + 1, n + 1):
            acc = add(acc, one(self.target))
            self._cache[k] = acc
        self._cache.setdefault(0, zero(self.target))
        return self._cache[n] if n else self._cache[0]

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"SemiringMorphism({self.source.id} -> {self.target.id})"


def apply_morphism(m: SemiringMorphism, g: GradeValue) -> GradeValue:
    return m.apply(g)


def synthesize_unique_morphism(source: SemiringSpec, target: SemiringSpec) -> SemiringMorphism:
    """The canonical morphism defined by ``f(0)=0`` and ``f(n+1)=f(n)+1``.

    Exists exactly when every source element is a finite sum of the source's
    1 (always true for the naturals) and the assignment is well defined.
    Raises ``NoMorphism`` otherwise; law validation happens separately.
    """
    if source.is_nat:
        return SemiringMorphism(source, target, None)
    # Enumerate n*1 in the source until the sequence cycles, mapping each
    # reached element to the matching sum in the target.
    table: dict[Element, Element] = {}
    src_acc = zero(source)
    tgt_acc = zero(target)
    seen: set[Element] = set()
    while src_acc.value not in seen:
        seen.add(src_acc.value)
        if src_acc.value in table and table[src_acc.value] != tgt_acc.value:
            raise CheckError(
                Code.NO_MORPHISM,
                f"canonical morphism '{source.id}' -> '{target.id}' is not well defined "
                f"at {src_acc.value!r}",
                payload={"source": source.id, "target": target.id, "element": src_acc.value},
            )
        table[src_acc.value] = tgt_acc.value
        src_acc = add(src_acc, one(source))
        tgt_acc = add(tgt_acc, one(target))
    if src_acc.value in table and table[src_acc.value] != tgt_acc.value:
        raise CheckError(
            Code.NO_MORPHISM,
            f"canonical morphism '{source.id}' -> '{target.id}' is not well defined "
            f"at {src_acc.value!r}",
            payload={"source": source.id, "target": target.id, "element": src_acc.value},
        )
    assert source.carrier is not None
    missing = [e for e in source.carrier if e not in table]
    if missing:
        raise CheckError(
            Code.NO_MORPHISM,
            f"'{source.id}' is not generated by 1 under +; no canonical morphism to "
            f"'{target.id}' (uncovered: {', '.join(missing)})",
            payload={"source": source.id, "target": target.id, "uncovered": tuple(missing)},
        )
    return SemiringMorphism(source, target, table)


@dataclass(frozen=True)
class LawViolation:
    """A single failed law instance: the law's name and the witness tuple."""

    law: str
    witness: tuple

    def __str__(self) -> str:
        return f"{self.law}: witness {self.witness}"


def _law_triples(s: SemiringSpec) -> Iterator[tuple[GradeValue, GradeValue, GradeValue]]:
    if s.carrier is not None:
        elems = [GradeValue(s, e) for e in s.carrier]
        for a in elems:
            for b in elems:
                for c in elems:
                    yield a, b, c
        return
    rng = random.Random(NAT_LAW_SAMPLE_SEED)
    small = [GradeValue(s, n) for n in range(4)]
    for a in small:
        for b in small:
            for c in small:
                yield a, b, c
    for _ in range(NAT_LAW_SAMPLE_COUNT):
        yield (
            GradeValue(s, rng.randrange(NAT_LAW_SAMPLE_BOUND)),
            GradeValue(s, rng.randrange(NAT_LAW_SAMPLE_BOUND)),
            GradeValue(s, rng.randrange(NAT_LAW_SAMPLE_BOUND)),
        )


def validate_semiring(s: SemiringSpec) -> list[LawViolation]:
    """Check every semiring/preorder law, reporting violations with witnesses.

    Finite carriers are checked exhaustively; the naturals are checked on all
    small triples plus a documented randomized sample (seed
    ``NAT_LAW_SAMPLE_SEED``).  Never raises for a law failure.
    """
    out: list[LawViolation] = []
    if not s.has_element(s.zero):
        out.append(LawViolation("zero-in-carrier", (s.zero,)))
        return out
    if not s.has_element(s.one):
        out.append(LawViolation("one-in-carrier", (s.one,)))
        return out
    if s.carrier is not None:
        assert s.add_table is not None and s.mul_table is not None
        for table, name in ((s.add_table, "add"), (s.mul_table, "mul")):
            for a in s.carrier:
                for b in s.carrier:
                    if (a, b) not in table:
                        out.append(LawViolation(f"{name}-total", (a, b)))
                    elif table[(a, b)] not in s.carrier:
                        out.append(LawViolation(f"{name}-closed", (a, b, table[(a, b)])))
        if out:
            return out
        for a, b in s.leq_pairs:
            if a not in s.carrier or b not in s.carrier:
                out.append(LawViolation("leq-in-carrier", (a, b)))
        if out:
            return out

    z, o = zero(s), one(s)
    seen_pairs: set[tuple[Element, Element, Element]] = set()
    for a, b, c in _law_triples(s):
        if add(add(a, b), c) != add(a, add(b, c)):
            out.append(LawViolation("add-assoc", (a.value, b.value, c.value)))
        if mul(mul(a, b), c) != mul(a, mul(b, c)):
            out.append(LawViolation("mul-assoc", (a.value, b.value, c.value)))
        if mul(a, add(b, c)) != add(mul(a, b), mul(a, c)):
            out.append(LawViolation("distrib-left", (a.value, b.value, c.value)))
        if mul(add(a, b), c) != add(mul(a, c), mul(b, c)):
            out.append(LawViolation("distrib-right", (a.value, b.value, c.value)))
        key = (a.value, b.value, c.value)
        if key not in seen_pairs:
            seen_pairs.add(key)
            if add(a, b) != add(b, a):
                out.append(LawViolation("add-comm", (a.value, b.value)))
            if add(a, z) != a:
                out.append(LawViolation("add-zero", (a.value,)))
            if mul(a, o) != a:
                out.append(LawViolation("mul-one-right", (a.value,)))
            if mul(o, a) != a:
                out.append(LawViolation("mul-one-left", (a.value,)))
            if mul(a, z) != z:
                out.append(LawViolation("mul-zero-right", (a.value,)))
            if mul(z, a) != z:
                out.append(LawViolation("mul-zero-left", (a.value,)))
            if not leq(a, a):
                out.append(LawViolation("leq-refl", (a.value,)))
            if leq(a, b):
                if add(a, c) != add(b, c) and not leq(add(a, c), add(b, c)):
                    out.append(LawViolation("add-monotone", (a.value, b.value, c.value)))
                if mul(a, c) != mul(b, c) and not leq(mul(a, c), mul(b, c)):
                    out.append(LawViolation("mul-monotone-left", (a.value, b.value, c.value)))
                if mul(c, a) != mul(c, b) and not leq(mul(c, a), mul(c, b)):
                    out.append(LawViolation("mul-monotone-right", (a.value, b.value, c.value)))
            if leq(a, b) and leq(b, c) and not leq(a, c):
                out.append(LawViolation("leq-trans", (a.value, b.value, c.value)))
    # de-duplicate (identical witnesses can be hit repeatedly by the sampler)
    unique: list[LawViolation] = []
    seen: set[tuple[str, tuple]] = set()
    for v in out:
        k = (v.law, v.witness)
        if k not in seen:
            seen.add(k)
            unique.append(v)
    return unique


def validate_morphism(m: SemiringMorphism) -> list[LawViolation]:
    """Check the four morphism laws (units, +, *) plus monotonicity."""
    out: list[LawViolation] = []
    src = m.source
    if m.table is not None:
        assert src.carrier is not None
        for e in src.carrier:
            if e not in m.table:
                out.append(LawViolation("morphism-total", (e,)))
            elif not m.target.has_element(m.table[e]):
                out.append(LawViolation("morphism-closed", (e, m.table[e])))
        if out:
            return out
    if m.apply(zero(src)) != zero(m.target):
        out.append(LawViolation("morphism-zero", (src.zero,)))
    if m.apply(one(src)) != one(m.target):
        out.append(LawViolation("morphism-one", (src.one,)))
    if src.carrier is not None:
        pairs = [(GradeValue(src, a), GradeValue(src, b)) for a in src.carrier for b in src.carrier]
    else:
        rng = random.Random(NAT_LAW_SAMPLE_SEED)
        pairs = [(GradeValue(src, a), GradeValue(src, b)) for a in range(4) for b in range(4)]
        pairs += [
            (GradeValue(src, rng.randrange(NAT_LAW_SAMPLE_BOUND)), GradeValue(src, rng.randrange(NAT_LAW_SAMPLE_BOUND)))
            for _ in range(200)
        ]
    for a, b in pairs:
        if m.apply(add(a, b)) != add(m.apply(a), m.apply(b)):
            out.append(LawViolation("morphism-add", (a.value, b.value)))
        if m.apply(mul(a, b)) != mul(m.apply(a), m.apply(b)):
            out.append(LawViolation("morphism-mul", (a.value, b.value)))
        if leq(a, b) and not leq(m.apply(a), m.apply(b)):
            out.append(LawViolation("morphism-monotone", (a.value, b.value)))
    unique: list[LawViolation] = []
    seen: set[tuple[str, tuple]] = set()
    for v in out:
        k = (v.law, v.witness)
        if k not in seen:
            seen.add(k)
            unique.append(v)
    return unique
