"""Config files for semirings and mode theories, plus the shipped registry.

Both formats are line oriented: ``key value...`` lines plus table blocks.  A
bare ``add``/``mul``/``order``/``mode-order`` line opens a block whose rows
are ``a b -> c`` (operation tables), ``a -> b`` (morphism tables) or
``a <= b`` (order generators).  ``#`` starts a comment; blank lines are
ignored.  Loading always validates: a file that parses but breaks the algebra
laws is rejected with the full violation report.

A mode line may derive an order variant of a referenced semiring, e.g.
``mode L semiring none-one-tons weak false order reflexive``; the variant is
registered under ``<base-id>/<order-tag>`` so grades from different variants
never mix silently.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cache
from importlib import resources
from typing import Mapping

from ..errors import CheckError, Code
from ..modes import Mode, ModeTheory, validate_mode_theory
from ..semiring import (
    SemiringMorphism,
    SemiringSpec,
    synthesize_unique_morphism,
    validate_semiring,
)

__all__ = [
    "parse_semiring_config",
    "parse_mode_config",
    "shipped_semirings",
    "shipped_mode_theories",
    "load_config",
    "SHIPPED_SEMIRING_IDS",
    "SHIPPED_MODE_THEORY_IDS",
]

SHIPPED_SEMIRING_IDS = (
    "nat",
    "nat-trivial-order",
    "boolean",
    "none-one-tons",
    "variance",
    "trivial",
)

SHIPPED_MODE_THEORY_IDS = (
    "dmgl-recovery",
    "lnld",
    "relevance",
    "variance-stack",
)


@dataclass(frozen=True)
class _Line:
    no: int
    tokens: tuple[str, ...]


def _parse_error(source: str, no: int, message: str) -> CheckError:
    return CheckError(
        Code.PARSE_ERROR,
        f"{source}:{no}: {message}",
        payload={"file": source, "line": no},
    )


def _lines(text: str) -> list[_Line]:
    out: list[_Line] = []
    for no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            out.append(_Line(no, tuple(body.split())))
    return out


def _set_once(
    fields: dict[str, tuple[str, ...]], line: _Line, source: str
) -> None:
    key = line.tokens[0]
    if key in fields:
        raise _parse_error(source, line.no, f"duplicate '{key}' declaration")
    fields[key] = line.tokens[1:]


# ---------------------------------------------------------------------------
# semiring files


def _validated(spec: SemiringSpec, source: str) -> SemiringSpec:
    violations = validate_semiring(spec)
    if violations:
        report = "; ".join(str(v) for v in violations)
        raise CheckError(
            Code.PARSE_ERROR,
            f"{source}: semiring '{spec.id}' violates laws: {report}",
            payload={"file": source, "violations": tuple(violations)},
        )
    return spec


def parse_semiring_config(text: str, *, source: str = "<semiring-config>") -> SemiringSpec:
    """Parse and validate one semiring config file."""
    lines = _lines(text)
    if not lines or lines[0].tokens[0] != "semiring" or len(lines[0].tokens) != 2:
        no = lines[0].no if lines else 1
        raise _parse_error(source, no, "expected header 'semiring <id>'")
    sr_id = lines[0].tokens[1]

    fields: dict[str, tuple[str, ...]] = {}
    add_rows: list[tuple[int, tuple[str, ...]]] = []
    mul_rows: list[tuple[int, tuple[str, ...]]] = []
    order_rows: list[tuple[int, tuple[str, ...]]] = []
    block: list[tuple[int, tuple[str, ...]]] | None = None

    for line in lines[1:]:
        key = line.tokens[0]
        if key in ("carrier", "elements", "zero", "one"):
            _set_once(fields, line, source)
            block = None
        elif key == "add" and len(line.tokens) == 1:
            block = add_rows
        elif key == "mul" and len(line.tokens) == 1:
            block = mul_rows
        elif key == "order":
            if len(line.tokens) == 2 and line.tokens[1] in ("usual", "trivial", "reflexive"):
                _set_once(fields, line, source)
                block = None
            elif len(line.tokens) == 1:
                block = order_rows
            else:
                raise _parse_error(
                    source, line.no, "expected 'order usual|trivial|reflexive' or a bare 'order' block"
                )
        elif block is not None and ("->" in line.tokens or "<=" in line.tokens):
            block.append((line.no, line.tokens))
        else:
            raise _parse_error(source, line.no, f"unexpected '{' '.join(line.tokens)}'")

    for field in ("zero", "one"):
        if field not in fields:
            raise _parse_error(source, lines[0].no, f"missing mandatory '{field}' declaration")
        if len(fields[field]) != 1:
            raise _parse_error(source, lines[0].no, f"'{field}' takes exactly one element")

    if "carrier" in fields:
        if "elements" in fields or add_rows or mul_rows or order_rows:
            raise _parse_error(
                source, lines[0].no, "a builtin carrier takes no element list or tables"
            )
        if fields["carrier"] != ("nat",):
            raise _parse_error(source, lines[0].no, "the only builtin carrier is 'nat'")
        nat_order = fields.get("order", ("usual",))[0]
        if nat_order not in ("usual", "trivial"):
            raise _parse_error(source, lines[0].no, "naturals order must be 'usual' or 'trivial'")
        if fields["zero"] != ("0",) or fields["one"] != ("1",):
            raise _parse_error(source, lines[0].no, "the naturals have zero 0 and one 1")
        return _validated(
            SemiringSpec(sr_id, carrier=None, zero=0, one=1, nat_order=nat_order), source
        )

    if "elements" not in fields:
        raise _parse_error(source, lines[0].no, "missing 'elements' list (or 'carrier nat')")
    elems = fields["elements"]
    if len(set(elems)) != len(elems):
        raise _parse_error(source, lines[0].no, "duplicate element names")

    def known(e: str, no: int) -> str:
        if e not in elems:
            raise _parse_error(source, no, f"unknown element '{e}'")
        return e

    for field in ("zero", "one"):
        known(fields[field][0], lines[0].no)

    def table(rows: list[tuple[int, tuple[str, ...]]], op: str) -> dict[tuple[str, str], str]:
        out: dict[tuple[str, str], str] = {}
        for no, tokens in rows:
            if len(tokens) != 4 or tokens[2] != "->":
                raise _parse_error(source, no, f"expected '{op}' row 'a b -> c'")
            key = (known(tokens[0], no), known(tokens[1], no))
            if key in out:
                raise _parse_error(source, no, f"duplicate '{op}' row for {key[0]} {key[1]}")
            out[key] = known(tokens[3], no)
        missing = [(a, b) for a in elems for b in elems if (a, b) not in out]
        if missing:
            a, b = missing[0]
            raise _parse_error(
                source, lines[0].no, f"'{op}' table is missing the row for {a} {b}"
            )
        return out

    if fields.get("order", ()) and fields["order"][0] in ("usual", "trivial"):
        raise _parse_error(source, lines[0].no, "'usual'/'trivial' orders apply only to the naturals")

    gens: list[tuple[str, str]] = []
    for no, tokens in order_rows:
        if len(tokens) != 3 or tokens[1] != "<=":
            raise _parse_error(source, no, "expected order row 'a <= b'")
        gens.append((known(tokens[0], no), known(tokens[2], no)))

    return _validated(
        SemiringSpec(
            sr_id,
            carrier=elems,
            zero=fields["zero"][0],
            one=fields["one"][0],
            add_table=table(add_rows, "add"),
            mul_table=table(mul_rows, "mul"),
            leq_pairs=gens,
        ),
        source,
    )


# ---------------------------------------------------------------------------
# mode-theory files


def _order_variant(base: SemiringSpec, spec_tokens: tuple[str, ...], source: str, no: int) -> SemiringSpec:
    tag = ",".join(spec_tokens)
    new_id = f"{base.id}/{tag}"
    if base.is_nat:
        if spec_tokens not in (("usual",), ("trivial",)):
            raise _parse_error(source, no, "naturals order override must be 'usual' or 'trivial'")
        return SemiringSpec(new_id, carrier=None, zero=0, one=1, nat_order=spec_tokens[0])
    if spec_tokens == ("reflexive",):
        gens: list[tuple[str, str]] = []
    else:
        gens = []
        for tok in spec_tokens:
            parts = tok.split("<=")
            if len(parts) != 2 or not all(parts):
                raise _parse_error(
                    source, no, f"order override generator '{tok}' is not of the form a<=b"
                )
            for e in parts:
                if base.carrier is None or e not in base.carrier:
                    raise _parse_error(source, no, f"unknown element '{e}' in order override")
            gens.append((parts[0], parts[1]))
    assert base.carrier is not None
    return SemiringSpec(
        new_id,
        carrier=base.carrier,
        zero=base.zero,
        one=base.one,
        add_table=base.add_table,
        mul_table=base.mul_table,
        leq_pairs=gens,
    )


def parse_mode_config(
    text: str,
    *,
    registry: Mapping[str, SemiringSpec] | None = None,
    source: str = "<mode-config>",
) -> ModeTheory:
    """Parse and validate one mode-theory config file.

    ``registry`` maps semiring ids to loaded specs; it defaults to the
    shipped registry.
    """
    if registry is None:
        registry = shipped_semirings()
    lines = _lines(text)
    if not lines or lines[0].tokens[0] != "mode-theory" or len(lines[0].tokens) != 2:
        no = lines[0].no if lines else 1
        raise _parse_error(source, no, "expected header 'mode-theory <id>'")
    mt_id = lines[0].tokens[1]

    modes: list[Mode] = []
    mode_ids: set[str] = set()
    order_gens: list[tuple[str, str]] = []
    morphisms: dict[tuple[str, str], SemiringMorphism] = {}
    in_order_block = False
    pending_table: tuple[str, str] | None = None
    tables: dict[tuple[str, str], dict[str, str]] = {}

    def semiring_of(mode_id: str, no: int) -> SemiringSpec:
        for m in modes:
            if m.id == mode_id:
                return m.semiring
        raise _parse_error(source, no, f"unknown mode '{mode_id}'")

    for line in lines[1:]:
        key = line.tokens[0]
        if key == "mode":
            in_order_block = False
            pending_table = None
            toks = list(line.tokens[1:])
            if not toks:
                raise _parse_error(source, line.no, "expected 'mode <id> semiring <id> weak <bool> [order ...]'")
            mode_id = toks.pop(0)
            if mode_id in mode_ids:
                raise _parse_error(source, line.no, f"duplicate mode '{mode_id}'")
            opts: dict[str, tuple[str, ...]] = {}
            while toks:
                opt = toks.pop(0)
                if opt == "semiring":
                    if not toks:
                        raise _parse_error(source, line.no, "'semiring' needs an id")
                    opts[opt] = (toks.pop(0),)
                elif opt == "weak":
                    if not toks or toks[0] not in ("true", "false"):
                        raise _parse_error(source, line.no, "'weak' must be 'true' or 'false'")
                    opts[opt] = (toks.pop(0),)
                elif opt == "order":
                    opts[opt] = tuple(toks)
                    toks = []
                else:
                    raise _parse_error(source, line.no, f"unknown mode option '{opt}'")
            if "semiring" not in opts or "weak" not in opts:
                raise _parse_error(source, line.no, "a mode needs 'semiring' and 'weak'")
            base_id = opts["semiring"][0]
            if base_id not in registry:
                raise _parse_error(source, line.no, f"semiring '{base_id}' is not in the registry")
            sr = registry[base_id]
            if "order" in opts:
                if not opts["order"]:
                    raise _parse_error(source, line.no, "'order' override needs an argument")
                sr = _order_variant(sr, opts["order"], source, line.no)
            modes.append(Mode(mode_id, sr, opts["weak"][0] == "true"))
            mode_ids.add(mode_id)
        elif key == "mode-order" and len(line.tokens) == 1:
            in_order_block = True
            pending_table = None
        elif key == "morphism":
            in_order_block = False
            pending_table = None
            if len(line.tokens) == 4 and line.tokens[3] == "unique":
                src, dst = line.tokens[1], line.tokens[2]
                morphisms[(src, dst)] = synthesize_unique_morphism(
                    semiring_of(src, line.no), semiring_of(dst, line.no)
                )
            elif len(line.tokens) == 3:
                src, dst = line.tokens[1], line.tokens[2]
                semiring_of(src, line.no)
                semiring_of(dst, line.no)
                pending_table = (src, dst)
                tables[pending_table] = {}
            else:
                raise _parse_error(
                    source, line.no, "expected 'morphism <src> <dst> unique' or a block of 'a -> b' rows"
                )
        elif in_order_block and len(line.tokens) == 3 and line.tokens[1] == "<=":
            a, b = line.tokens[0], line.tokens[2]
            for x in (a, b):
                if x not in mode_ids:
                    raise _parse_error(source, line.no, f"unknown mode '{x}' in mode-order")
            order_gens.append((a, b))
        elif pending_table is not None and len(line.tokens) == 3 and line.tokens[1] == "->":
            src_sr = semiring_of(pending_table[0], line.no)
            dst_sr = semiring_of(pending_table[1], line.no)
            a, b = line.tokens[0], line.tokens[2]
            if src_sr.carrier is None or a not in src_sr.carrier:
                raise _parse_error(source, line.no, f"'{a}' is not a source element")
            if dst_sr.carrier is None or b not in dst_sr.carrier:
                raise _parse_error(source, line.no, f"'{b}' is not a target element")
            tables[pending_table][a] = b
        else:
            raise _parse_error(source, line.no, f"unexpected '{' '.join(line.tokens)}'")

    for (src, dst), table in tables.items():
        src_sr = semiring_of(src, lines[0].no)
        assert src_sr.carrier is not None
        missing = [e for e in src_sr.carrier if e not in table]
        if missing:
            raise _parse_error(
                source, lines[0].no,
                f"morphism {src} -> {dst} is missing the image of '{missing[0]}'",
            )
        morphisms[(src, dst)] = SemiringMorphism(src_sr, semiring_of(dst, lines[0].no), table)

    mt = ModeTheory(mt_id, modes, order_gens, morphisms)
    violations = validate_mode_theory(mt)
    if violations:
        report = "; ".join(str(v) for v in violations)
        raise CheckError(
            Code.PARSE_ERROR,
            f"{source}: mode theory '{mt_id}' violates laws: {report}",
            payload={"file": source, "violations": tuple(violations)},
        )
    return mt


# ---------------------------------------------------------------------------
# shipped registry


def _data_text(name: str) -> str:
    return (resources.files(__package__) / name).read_text(encoding="utf-8")


@cache
def shipped_semirings() -> Mapping[str, SemiringSpec]:
    """All semiring configs shipped with the package, keyed by id."""
    out: dict[str, SemiringSpec] = {}
    for sr_id in SHIPPED_SEMIRING_IDS:
        name = f"{sr_id}.sr"
        spec = parse_semiring_config(_data_text(name), source=name)
        if spec.id != sr_id:
            raise CheckError(
                Code.PARSE_ERROR,
                f"{name}: declares id '{spec.id}', expected '{sr_id}'",
            )
        out[sr_id] = spec
    return out


@cache
def shipped_mode_theories() -> Mapping[str, ModeTheory]:
    """All mode-theory configs shipped with the package, keyed by id."""
    out: dict[str, ModeTheory] = {}
    for mt_id in SHIPPED_MODE_THEORY_IDS:
        name = f"{mt_id}.mt"
        mt = parse_mode_config(_data_text(name), source=name)
        if mt.id != mt_id:
            raise CheckError(
                Code.PARSE_ERROR,
                f"{name}: declares id '{mt.id}', expected '{mt_id}'",
            )
        out[mt_id] = mt
    return out


def load_config(ref: str) -> SemiringSpec | ModeTheory:
    """Resolve ``ref`` as a shipped config id or a path to a config file.

    A file is recognized as a mode theory by its ``mode-theory`` header,
    otherwise parsed as a semiring.
    """
    shipped_sr = shipped_semirings()
    if ref in shipped_sr:
        return shipped_sr[ref]
    shipped_mt = shipped_mode_theories()
    if ref in shipped_mt:
        return shipped_mt[ref]
    try:
        with open(ref, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise CheckError(
            Code.PARSE_ERROR,
            f"'{ref}' is neither a shipped config id nor a readable file ({e})",
            payload={"ref": ref},
        ) from None
    lines = _lines(text)
    if lines and lines[0].tokens[0] == "mode-theory":
        return parse_mode_config(text, source=ref)
    return parse_semiring_config(text, source=ref)
