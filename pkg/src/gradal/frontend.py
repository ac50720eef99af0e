"""Surface syntax: lexer, parser, pretty-printer, and module checking.

A module file is a sequence of statements, each ended by ``;``:

* ``config <id>;`` — at most one; names a shipped config or a file path.
* ``graded def <name> : <type> = <term>;``
* ``mixed def <name> : <type> = <term>;`` — the subject is a linear term.
* ``glad def <name> @ <mode> : <type> = <term>;``
* ``assert <fragment> accept|reject [<Code>] <judgment>;``
* ``reduce <fragment> <term>;`` — a closed term for ``gradal reduce``.

Judgment bodies mirror the renderer exactly, so a rendered judgment is
re-parseable::

    [2] (.) x : J |-G (x, x) : (p :^2 J) >< J
    [1] (.) . ; y : I |-M y : I
    [1, 0] | [L, U] (.) x : I@L, u : I@U |-_L x : I@L

Binders are resolved to de Bruijn indices at parse time; the pretty-printer
re-derives display names from binder hints, so ``parse . print`` is the
identity up to alpha equivalence.  Three-character operator tokens ``(x)``,
``(+)`` and ``(.)`` are matched only when written without inner spaces, so a
parenthesized variable ``x`` must be written ``( x )``.
"""

from __future__ import annotations

import contextvars
from dataclasses import dataclass, field
from typing import Callable, Iterable, Literal, Mapping, Sequence, Union

from .configs import load_config
from .dmgl import (
    CheckerConfig,
    Derivation,
    check_graded,
    check_mixed,
)
from .errors import CheckError, Code
from .glad import GladCheckerConfig, check_glad
from .modes import ModeTheory
from .reduction import ReductionTrace, default_fuel, normalize
from .semiring import GradeValue, GradeVector, SemiringSpec, vec
from .syntax import (
    AppG,
    AppLin,
    App,
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
    GladContext,
    GradedArrow,
    GladCtxWF,
    GladTyping,
    GradedContext,
    GradedCtxWF,
    GradedTyping,
    ILin,
    Inl,
    InlG,
    Inr,
    InrG,
    Judgment,
    Lam,
    LamG,
    LamLin,
    LinearContext,
    LinearU,
    Lollipop,
    LVar,
    MixedCtxWF,
    MixedTyping,
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
    Term,
    TypeU,
    UnitI,
    UnitIElim,
    UnitIM,
    UnitJ,
    UnitJElim,
    UnitJType,
    Var,
)

__all__ = [
    "Span",
    "Diagnostic",
    "SourceModule",
    "Declaration",
    "Assertion",
    "ReduceStatement",
    "parse_module",
    "print_term",
    "render_judgment",
    "render_derivation",
    "render_error",
    "render_trace",
    "check_module",
    "reduce_module",
]

Fragment = Literal["graded", "mixed", "glad"]


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True, order=True)
class Span:
    file: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


@dataclass(frozen=True)
class Diagnostic:
    """One reportable condition, carrying the stable error code."""

    severity: Literal["error", "note"]
    code: Code
    span: Span
    message: str
    rule: str | None = None
    payload: Mapping[str, object] = field(default_factory=dict)


def render_error(diag: Diagnostic) -> str:
    rule = f" [{diag.rule}]" if diag.rule else ""
    return f"{diag.span}: {diag.severity}: {diag.code.value}{rule}: {diag.message}"


def _sort_key(diag: Diagnostic) -> tuple:
    return (diag.span.file, diag.span.line, diag.span.col)


# ---------------------------------------------------------------------------
# lexer

_PUNCT = (
    "case^",
    "(x)",
    "(+)",
    "(.)",
    "|-_",
    "|-G",
    "|-M",
    "|",
    ":^",
    "-o",
    "->",
    "><",
    "~~",
    "^^",
    "vv",
    "??",
    "\\",
    "(",
    ")",
    "[",
    "]",
    ",",
    ";",
    ":",
    ".",
    "@",
    "*",
    "=",
)

_KEYWORDS = frozenset(
    {
        "config",
        "def",
        "assert",
        "expect",
        "reduce",
        "accept",
        "reject",
        "graded",
        "mixed",
        "glad",
        "let",
        "in",
        "of",
        "case",
        "inl",
        "inr",
        "up",
        "down",
        "Type",
        "Lin",
        "J",
        "j",
        "I",
        "i",
        "G",
        "Ginv",
        "Gwrap",
        "F",
    }
)


@dataclass(frozen=True)
class _Token:
    kind: Literal["punct", "kw", "ident", "nat", "eof"]
    text: str
    line: int
    col: int


def _is_ident_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _is_ident_char(c: str) -> bool:
    return c.isalnum() or c in "_'"


def _lex(text: str, source: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c in " \t\r":
            i, col = i + 1, col + 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        # config references may be hyphenated ids or file paths, which do not
        # tokenize under the ordinary rules; take the whole run in one token
        if tokens and tokens[-1].kind == "kw" and tokens[-1].text == "config":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_-./"):
                j += 1
            if j > i:
                tokens.append(_Token("ident", text[i:j], line, col))
                col += j - i
                i = j
                continue
        hit = None
        for p in _PUNCT:
            if text.startswith(p, i):
                hit = p
                break
        if hit is not None:
            tokens.append(_Token("punct", hit, line, col))
            i += len(hit)
            col += len(hit)
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("nat", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if _is_ident_start(c):
            j = i
            while j < n and _is_ident_char(text[j]):
                j += 1
            word = text[i:j]
            kind = "kw" if word in _KEYWORDS else "ident"
            tokens.append(_Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        raise CheckError(
            Code.PARSE_ERROR,
            f"{source}:{line}:{col}: unexpected character {c!r}",
            payload={"file": source, "line": line, "col": col},
        )
    tokens.append(_Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# module AST


@dataclass(frozen=True)
class Declaration:
    fragment: Fragment
    name: str
    mode: str | None
    type_: Term
    term: Term
    span: Span


@dataclass(frozen=True)
class Assertion:
    fragment: Fragment
    expect: Literal["accept", "reject"]
    expected_code: Code | None
    delta: GradeVector
    gctx: GradedContext | None
    lctx: LinearContext | None
    ctx: GladContext | None
    mode: str | None
    term: Term
    type_: Term
    span: Span


@dataclass(frozen=True)
class ReduceStatement:
    fragment: Fragment
    term: Term
    span: Span


Statement = Union[Declaration, Assertion, ReduceStatement]


@dataclass(frozen=True)
class SourceModule:
    path: str
    config_ref: str | None
    config: SemiringSpec | ModeTheory | None
    statements: tuple[Statement, ...]


# ---------------------------------------------------------------------------
# parser

_P_EXPR = 0
_P_ASC = 1
_P_ARROW = 2
_P_SUM = 3
_P_TENSOR = 4
_P_APP = 5
_P_ATOM = 6


class _Parser:
    def __init__(self, text: str, source: str, config: SemiringSpec | ModeTheory | None):
        self.source = source
        self.toks = _lex(text, source)
        self.pos = 0
        self.config = config
        # most recent binding last; entries are (name, zone) with zone
        # "g" (graded / many-mode) or "l" (linear)
        self.scope: list[tuple[str, str]] = []

    # --- token plumbing

    def _peek(self, ahead: int = 0) -> _Token:
        ix = min(self.pos + ahead, len(self.toks) - 1)
        return self.toks[ix]

    def _next(self) -> _Token:
        tok = self.toks[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def _at(self, text: str) -> bool:
        return self._peek().text == text and self._peek().kind in ("punct", "kw")

    def _eat(self, text: str) -> bool:
        if self._at(text):
            self._next()
            return True
        return False

    def _err(self, message: str, tok: _Token | None = None) -> CheckError:
        tok = tok or self._peek()
        return CheckError(
            Code.PARSE_ERROR,
            f"{self.source}:{tok.line}:{tok.col}: {message}",
            payload={"file": self.source, "line": tok.line, "col": tok.col},
        )

    def _expect(self, text: str, what: str | None = None) -> _Token:
        tok = self._peek()
        if not self._at(text):
            shown = tok.text if tok.kind != "eof" else "end of input"
            raise self._err(f"expected '{text}'{f' {what}' if what else ''}, found '{shown}'")
        return self._next()

    def _span(self, tok: _Token) -> Span:
        return Span(self.source, tok.line, tok.col)

    def _ident(self, what: str) -> str:
        tok = self._peek()
        if tok.kind != "ident":
            raise self._err(f"expected {what}, found '{tok.text or 'end of input'}'")
        return self._next().text

    def _name_token(self, what: str) -> str:
        """An identifier or keyword used as a name (modes may be single
        capitals that happen to be reserved words)."""
        tok = self._peek()
        if tok.kind not in ("ident", "kw"):
            raise self._err(f"expected {what}, found '{tok.text or 'end of input'}'")
        return self._next().text

    # --- scopes

    def _push(self, name: str, zone: str) -> None:
        self.scope.append((name, zone))

    def _pop(self, k: int = 1) -> None:
        del self.scope[-k:]

    def _resolve(self, name: str, tok: _Token) -> Term:
        for rev, (n, zone) in enumerate(reversed(self.scope)):
            if n == name:
                same_zone_above = sum(
                    1 for m, z in self.scope[len(self.scope) - rev :] if z == zone
                )
                return Var(same_zone_above) if zone == "g" else LVar(same_zone_above)
        raise CheckError(
            Code.UNBOUND_NAME,
            f"{self.source}:{tok.line}:{tok.col}: unbound name '{name}'",
            payload={"file": self.source, "line": tok.line, "col": tok.col, "name": name},
        )

    # --- grades and modes

    def _semiring(self, tok: _Token) -> SemiringSpec:
        if isinstance(self.config, SemiringSpec):
            return self.config
        raise self._err(
            "this statement needs a semiring config (got "
            + ("a mode theory" if self.config else "none")
            + "); add a 'config <semiring-id>;' line or pass --config",
            tok,
        )

    def _theory(self, tok: _Token) -> ModeTheory:
        if isinstance(self.config, ModeTheory):
            return self.config
        raise self._err(
            "this statement needs a mode-theory config (got "
            + ("a semiring" if self.config else "none")
            + "); add a 'config <mode-theory-id>;' line or pass --config",
            tok,
        )

    def _grade_token(self) -> _Token:
        tok = self._peek()
        if tok.kind in ("nat", "ident") or tok.text in ("~~", "^^", "vv", "??"):
            return self._next()
        raise self._err(f"expected a grade, found '{tok.text or 'end of input'}'")

    def _grade_value(self, tok: _Token, semiring: SemiringSpec) -> GradeValue:
        if semiring.is_nat:
            if tok.kind != "nat":
                raise self._err(
                    f"'{tok.text}' is not a natural number grade (semiring '{semiring.id}')", tok
                )
            return GradeValue(semiring, int(tok.text))
        if not semiring.has_element(tok.text):
            raise self._err(
                f"'{tok.text}' is not an element of semiring '{semiring.id}'", tok
            )
        return GradeValue(semiring, tok.text)

    def _grade(self, semiring: SemiringSpec) -> GradeValue:
        return self._grade_value(self._grade_token(), semiring)

    def _mode(self) -> str:
        return self._name_token("a mode name")

    def _mode_semiring(self, mode: str, tok: _Token) -> SemiringSpec:
        return self._theory(tok).semiring_of(mode)

    # --- shared expression helpers

    def _binder_ahead(self) -> bool:
        return (
            self._peek().text == "("
            and self._peek(1).kind in ("ident", "kw")
            and self._peek(2).text == ":^"
        )

    # --- graded fragment grammar

    def g_expr(self, p: int = _P_EXPR) -> Term:
        if p <= _P_EXPR:
            if self._eat("\\"):
                name = self._ident("a binder name after '\\'")
                self._expect(".")
                self._push(name, "g")
                body = self.g_expr()
                self._pop()
                return Lam(name, body)
            if self._at("let"):
                return self._g_let()
            if self._at("case^"):
                return self._g_case()
        if p <= _P_ARROW:
            t = self._g_arrow()
        elif p <= _P_SUM:
            t = self._g_sum()
        else:
            t = self._g_app()
        if p <= _P_ASC and self._at(":"):
            self._next()
            ty = self.g_expr(_P_ASC)
            return Ascribe(t, ty)
        return t

    def _g_let(self) -> Term:
        self._expect("let")
        if self._eat("j"):
            self._expect("=")
            scrut = self.g_expr()
            self._expect("in")
            body = self.g_expr()
            return UnitJElim(scrut, body)
        self._expect("(", "after 'let'")
        n1 = self._ident("a binder name")
        self._expect(",")
        n2 = self._ident("a binder name")
        self._expect(")")
        self._expect("=")
        scrut = self.g_expr()
        self._expect("in")
        self._push(n1, "g")
        self._push(n2, "g")
        body = self.g_expr()
        self._pop(2)
        return PairElim(n1, n2, scrut, body)

    def _g_case(self) -> Term:
        tok = self._expect("case^")
        q = self._grade(self._semiring(tok))
        scrut = self.g_expr(_P_ARROW)
        self._expect("of")
        left = self.g_expr()
        self._expect(";")
        right = self.g_expr()
        return Case(q, scrut, left, right)

    def _g_arrow(self) -> Term:
        if self._binder_ahead():
            self._next()
            name = self._name_token("a binder name")
            tok = self._expect(":^")
            r = self._grade(self._semiring(tok))
            dom = self.g_expr()
            self._expect(")")
            if self._eat("->"):
                self._push(name, "g")
                cod = self.g_expr(_P_ARROW)
                self._pop()
                return GradedArrow(r, name, dom, cod)
            self._expect("><", "(or '->') after a graded binder")
            self._push(name, "g")
            right = self.g_expr(_P_ARROW)
            self._pop()
            return BoxTimes(r, name, dom, right)
        return self._g_sum()

    def _g_sum(self) -> Term:
        left = self._g_app()
        if self._eat("(+)"):
            return BoxPlus(left, self.g_expr(_P_SUM))
        return left

    def _g_app(self) -> Term:
        head = self._g_atom()
        while True:
            arg = self._g_try_atom()
            if arg is None:
                return head
            head = App(head, arg)

    def _g_try_atom(self) -> Term | None:
        tok = self._peek()
        if tok.kind == "ident" or tok.text in (
            "j",
            "J",
            "i",
            "I",
            "Type",
            "Lin",
            "inl",
            "inr",
            "G",
            "Gwrap",
        ):
            return self._g_atom()
        if tok.text == "(" and not self._binder_ahead():
            return self._g_atom()
        return None

    def _g_atom(self) -> Term:
        tok = self._peek()
        if tok.kind == "ident":
            self._next()
            return self._resolve(tok.text, tok)
        if self._eat("j"):
            return UnitJ()
        if self._eat("J"):
            return UnitJType()
        if self._eat("Type"):
            return TypeU()
        if self._eat("Lin"):
            return LinearU()
        if self._eat("inl"):
            return Inl(self._g_atom())
        if self._eat("inr"):
            return Inr(self._g_atom())
        if self._eat("G"):
            return GAdj(self.l_atom())
        if self._eat("Gwrap"):
            return GWrap(self.l_atom())
        if tok.text in ("i", "I"):
            raise self._err("linear unit syntax is only valid inside a linear term")
        if self._eat("("):
            inner = self.g_expr()
            if self._eat(","):
                right = self.g_expr()
                self._expect(")")
                return Pair(inner, right)
            self._expect(")")
            return inner
        raise self._err(f"expected a graded term, found '{tok.text or 'end of input'}'")

    # --- linear (mixed) fragment grammar

    def l_expr(self, p: int = _P_EXPR) -> Term:
        if p <= _P_EXPR:
            if self._eat("\\"):
                name = self._ident("a binder name after '\\'")
                self._expect(".")
                self._push(name, "l")
                body = self.l_expr()
                self._pop()
                return LamLin(name, body)
            if self._at("let"):
                return self._l_let()
        if p <= _P_ARROW:
            t = self._l_lolli()
        elif p <= _P_TENSOR:
            t = self._l_tensor()
        else:
            t = self._l_app()
        if p <= _P_ASC and self._at(":"):
            self._next()
            ty = self.l_expr(_P_ASC)
            return Ascribe(t, ty)
        return t

    def _l_let(self) -> Term:
        self._expect("let")
        if self._eat("i"):
            self._expect("=")
            scrut = self.l_expr()
            self._expect("in")
            body = self.l_expr()
            return UnitIElim(scrut, body)
        if self._eat("F"):
            self._expect("(", "after 'let F'")
            gname = self._ident("a binder name")
            self._expect(",")
            lname = self._ident("a binder name")
            self._expect(")")
            self._expect("=")
            scrut = self.l_expr()
            self._expect("in")
            self._push(gname, "g")
            self._push(lname, "l")
            body = self.l_expr()
            self._pop(2)
            return FElim(gname, lname, scrut, body)
        self._expect("(", "after 'let'")
        n1 = self._ident("a binder name")
        self._expect(",")
        n2 = self._ident("a binder name")
        self._expect(")")
        self._expect("=")
        scrut = self.l_expr()
        self._expect("in")
        self._push(n1, "l")
        self._push(n2, "l")
        body = self.l_expr()
        self._pop(2)
        return TensorElim(n1, n2, scrut, body)

    def _l_lolli(self) -> Term:
        left = self._l_tensor()
        if self._eat("-o"):
            return Lollipop(left, self.l_expr(_P_ARROW))
        return left

    def _l_tensor(self) -> Term:
        left = self._l_app()
        if self._eat("(x)"):
            return Tensor(left, self.l_expr(_P_TENSOR))
        return left

    def _l_app(self) -> Term:
        head = self.l_atom()
        while True:
            arg = self._l_try_atom()
            if arg is None:
                return head
            head = AppLin(head, arg)

    def _l_try_atom(self) -> Term | None:
        tok = self._peek()
        if tok.kind == "ident" or tok.text in ("i", "I", "F", "Ginv"):
            return self.l_atom()
        if tok.text == "(" and not self._binder_ahead():
            return self.l_atom()
        return None

    def l_atom(self) -> Term:
        tok = self._peek()
        if tok.kind == "ident":
            self._next()
            return self._resolve(tok.text, tok)
        if self._eat("i"):
            return UnitI()
        if self._eat("I"):
            return ILin()
        if self._eat("Ginv"):
            return GInv(self._g_atom())
        if self._eat("F"):
            self._expect("(", "after 'F'")
            if self._peek().kind in ("ident", "kw") and self._peek(1).text == ":^":
                name = self._name_token("a binder name")
                tok2 = self._expect(":^")
                r = self._grade(self._semiring(tok2))
                dom = self.g_expr()
                self._expect(")")
                self._expect(".", "after a left-adjoint binder")
                self._push(name, "g")
                body = self.l_expr(_P_ARROW)
                self._pop()
                return FAdj(r, name, dom, body)
            graded_part = self.g_expr()
            self._expect(",")
            linear_part = self.l_expr()
            self._expect(")")
            return FPair(graded_part, linear_part)
        if tok.text in ("j", "J"):
            raise self._err("graded unit syntax is only valid inside a graded term")
        if self._eat("("):
            inner = self.l_expr()
            if self._eat(","):
                right = self.l_expr()
                self._expect(")")
                return TensorPair(inner, right)
            self._expect(")")
            return inner
        raise self._err(f"expected a linear term, found '{tok.text or 'end of input'}'")

    # --- many-mode fragment grammar

    def d_expr(self, p: int = _P_EXPR) -> Term:
        if p <= _P_EXPR:
            if self._eat("\\"):
                name = self._ident("a binder name after '\\'")
                self._expect(".")
                self._push(name, "g")
                body = self.d_expr()
                self._pop()
                return LamG(name, body)
            if self._at("let"):
                return self._d_let()
            if self._at("case^"):
                return self._d_case()
        if p <= _P_ARROW:
            t = self._d_arrow()
        elif p <= _P_SUM:
            t = self._d_sum()
        else:
            t = self._d_app()
        if p <= _P_ASC and self._at(":"):
            self._next()
            ty = self.d_expr(_P_ASC)
            return Ascribe(t, ty)
        return t

    def _d_let(self) -> Term:
        self._expect("let")
        if self._eat("*"):
            self._expect("=")
            scrut = self.d_expr()
            self._expect("in")
            body = self.d_expr()
            return StarElim(scrut, body)
        self._expect("(", "after 'let'")
        n1 = self._ident("a binder name")
        self._expect(",")
        n2 = self._ident("a binder name")
        self._expect(")")
        self._expect("=")
        scrut = self.d_expr()
        self._expect("in")
        self._push(n1, "g")
        self._push(n2, "g")
        body = self.d_expr()
        self._pop(2)
        return PairGElim(n1, n2, scrut, body)

    def _d_case(self) -> Term:
        tok = self._expect("case^")
        q_tok = self._grade_token()
        self._expect("@", "naming the case grade's mode")
        mode = self._mode()
        q = self._grade_value(q_tok, self._mode_semiring(mode, tok))
        scrut = self.d_expr(_P_ARROW)
        self._expect("of")
        left = self.d_expr()
        self._expect(";")
        right = self.d_expr()
        return CaseG(q, scrut, left, right)

    def _d_arrow(self) -> Term:
        if self._binder_ahead():
            self._next()
            name = self._name_token("a binder name")
            tok = self._expect(":^")
            q_tok = self._grade_token()
            self._expect("@", "naming the binder grade's mode")
            mode = self._mode()
            q = self._grade_value(q_tok, self._mode_semiring(mode, tok))
            dom = self.d_expr()
            self._expect(")")
            if self._eat("-o"):
                self._push(name, "g")
                cod = self.d_expr(_P_ARROW)
                self._pop()
                return PiG(q, mode, name, dom, cod)
            self._expect("(x)", "(or '-o') after a mode binder")
            self._push(name, "g")
            right = self.d_expr(_P_ARROW)
            self._pop()
            return TensorG(q, mode, name, dom, right)
        return self._d_sum()

    def _d_sum(self) -> Term:
        left = self._d_app()
        if self._eat("(+)"):
            return OplusG(left, self.d_expr(_P_SUM))
        return left

    def _d_app(self) -> Term:
        head = self._d_atom()
        while True:
            arg = self._d_try_atom()
            if arg is None:
                return head
            head = AppG(head, arg)

    def _d_try_atom(self) -> Term | None:
        tok = self._peek()
        if tok.kind == "ident" or tok.text in ("*", "I", "Type", "inl", "inr", "up", "down"):
            return self._d_atom()
        if tok.text == "(" and not self._binder_ahead():
            return self._d_atom()
        return None

    def _d_atom(self) -> Term:
        tok = self._peek()
        if tok.kind == "ident":
            self._next()
            return self._resolve(tok.text, tok)
        if self._eat("*"):
            self._expect("@", "after '*'")
            return StarM(self._mode())
        if self._eat("I"):
            self._expect("@", "after 'I'")
            return UnitIM(self._mode())
        if self._eat("Type"):
            return TypeU()
        if self._eat("inl"):
            return InlG(self._d_atom())
        if self._eat("inr"):
            return InrG(self._d_atom())
        if self._eat("up") or tok.text == "down":
            if tok.text == "down":
                self._next()
            self._expect("[", f"after '{tok.text}'")
            lo = self._mode()
            self._expect("->")
            hi = self._mode()
            self._expect("]")
            body = self._d_atom()
            return ShiftUp(lo, hi, body) if tok.text == "up" else ShiftDown(lo, hi, body)
        if self._eat("("):
            inner = self.d_expr()
            if self._eat(","):
                right = self.d_expr()
                self._expect(")")
                return PairG(inner, right)
            self._expect(")")
            return inner
        raise self._err(f"expected a term, found '{tok.text or 'end of input'}'")

    # --- judgment bodies

    def _vector_tokens(self) -> list[_Token]:
        self._expect("[", "starting a grade vector")
        toks: list[_Token] = []
        if not self._at("]"):
            toks.append(self._grade_token())
            while self._eat(","):
                toks.append(self._grade_token())
        self._expect("]")
        return toks

    def _graded_zone(self) -> GradedContext:
        if self._eat("."):
            return GradedContext(())
        entries: list[tuple[str, Term]] = []
        while True:
            name = self._ident("a context entry name")
            self._expect(":")
            ty = self.g_expr(_P_ARROW)
            entries.append((name, ty))
            self._push(name, "g")
            if not self._eat(","):
                return GradedContext(tuple(entries))

    def _linear_zone(self) -> LinearContext:
        if self._eat("."):
            return LinearContext(())
        gscope = list(self.scope)  # linear entry types scope over the graded zone only
        entries: list[tuple[str, Term]] = []
        while True:
            name = self._ident("a context entry name")
            self._expect(":")
            self.scope = list(gscope)
            ty = self.l_expr(_P_ARROW)
            entries.append((name, ty))
            if not self._eat(","):
                self.scope = gscope + [(n, "l") for n, _ in entries]
                return LinearContext(tuple(entries))

    def _mode_vector(self) -> list[str]:
        self._expect("|", "between the grade and mode vectors")
        self._expect("[", "starting the mode vector")
        modes: list[str] = []
        if not self._at("]"):
            modes.append(self._mode())
            while self._eat(","):
                modes.append(self._mode())
        self._expect("]")
        return modes

    def _glad_zone(self, modes: list[str], where: _Token) -> GladContext:
        if self._eat("."):
            if modes:
                raise self._err(
                    f"mode vector of length {len(modes)} against an empty context", where
                )
            return GladContext(())
        entries: list[tuple[str, Term]] = []
        while True:
            name = self._ident("a context entry name")
            self._expect(":")
            ty = self.d_expr(_P_ARROW)
            entries.append((name, ty))
            self._push(name, "g")
            if not self._eat(","):
                break
        if len(modes) != len(entries):
            raise self._err(
                f"mode vector of length {len(modes)} against a context of "
                f"{len(entries)} entries",
                where,
            )
        return GladContext(tuple((n, ty, m) for (n, ty), m in zip(entries, modes)))

    # --- statements

    def parse_module(self, path: str, default_config: str | None) -> SourceModule:
        config_ref: str | None = None
        statements: list[Statement] = []
        seen_names: set[str] = set()
        first = True
        while self._peek().kind != "eof":
            tok = self._peek()
            if self._eat("config"):
                if not first or config_ref is not None:
                    raise self._err("'config' must be the first statement and appear once", tok)
                config_ref = self._name_token("a config id or path")
                self._expect(";")
                self.config = load_config(config_ref)
                first = False
                continue
            first = False
            if self.config is None and default_config is not None:
                self.config = load_config(default_config)
            if tok.text in ("graded", "mixed", "glad"):
                fragment: Fragment = tok.text  # type: ignore[assignment]
                self._next()
                if self._at("def"):
                    statements.append(self._declaration(fragment, tok, seen_names))
                else:
                    raise self._err("expected 'def' after the fragment tag")
            elif self._eat("assert") or self._eat("expect"):
                statements.append(self._assertion(tok))
            elif self._eat("reduce"):
                statements.append(self._reduce(tok))
            else:
                raise self._err(
                    f"expected a statement, found '{tok.text or 'end of input'}'"
                )
        return SourceModule(path, config_ref, self.config, tuple(statements))

    def _declaration(self, fragment: Fragment, tok: _Token, seen: set[str]) -> Declaration:
        self._expect("def")
        name = self._ident("a declaration name")
        if name in seen:
            raise self._err(f"duplicate declaration name '{name}'", tok)
        seen.add(name)
        mode = None
        if fragment == "glad":
            self._expect("@", "giving the declaration's mode")
            mode = self._mode()
        self._expect(":")
        self.scope = []
        if fragment == "graded":
            ty = self.g_expr(_P_ARROW)
            self._expect("=")
            term = self.g_expr()
        elif fragment == "mixed":
            ty = self.l_expr(_P_ARROW)
            self._expect("=")
            term = self.l_expr()
        else:
            ty = self.d_expr(_P_ARROW)
            self._expect("=")
            term = self.d_expr()
        self._expect(";")
        return Declaration(fragment, name, mode, ty, term, self._span(tok))

    def _assertion(self, tok: _Token) -> Assertion:
        frag_tok = self._peek()
        if frag_tok.text not in ("graded", "mixed", "glad"):
            raise self._err("expected a fragment tag ('graded', 'mixed' or 'glad')")
        fragment: Fragment = self._next().text  # type: ignore[assignment]
        if self._eat("accept"):
            expect: Literal["accept", "reject"] = "accept"
        elif self._eat("reject"):
            expect = "reject"
        else:
            raise self._err("expected 'accept' or 'reject'")
        expected_code: Code | None = None
        if expect == "reject" and self._peek().kind == "ident":
            code_tok = self._next()
            try:
                expected_code = Code(code_tok.text)
            except ValueError:
                raise self._err(f"unknown diagnostic code '{code_tok.text}'", code_tok) from None
        self.scope = []
        vec_toks = self._vector_tokens()
        gctx: GradedContext | None = None
        lctx: LinearContext | None = None
        ctx: GladContext | None = None
        mode: str | None = None
        if fragment == "graded":
            self._expect("(.)", "between the vector and the context")
            gctx = self._graded_zone()
            turn = self._expect("|-G")
            delta = vec(self._grade_value(t, self._semiring(turn)) for t in vec_toks)
            term = self.g_expr(_P_ARROW)
            self._expect(":")
            ty = self.g_expr(_P_ARROW)
        elif fragment == "mixed":
            self._expect("(.)", "between the vector and the context")
            gctx = self._graded_zone()
            self._expect(";", "between the graded and linear zones")
            lctx = self._linear_zone()
            turn = self._expect("|-M")
            delta = vec(self._grade_value(t, self._semiring(turn)) for t in vec_toks)
            term = self.l_expr(_P_ARROW)
            self._expect(":")
            ty = self.l_expr(_P_ARROW)
        else:
            modes = self._mode_vector()
            self._expect("(.)", "between the mode vector and the context")
            ctx = self._glad_zone(modes, tok)
            turn = self._expect("|-_")
            mode = self._mode()
            theory = self._theory(turn)
            if len(vec_toks) != len(ctx.entries):
                raise self._err(
                    f"vector of length {len(vec_toks)} against a context of "
                    f"{len(ctx.entries)} entries",
                    turn,
                )
            delta = vec(
                self._grade_value(t, theory.semiring_of(entry[2]))
                for t, entry in zip(vec_toks, ctx.entries)
            )
            term = self.d_expr(_P_ARROW)
            self._expect(":")
            ty = self.d_expr(_P_ARROW)
        self._expect(";")
        return Assertion(
            fragment, expect, expected_code, delta, gctx, lctx, ctx, mode, term, ty,
            self._span(tok),
        )

    def _reduce(self, tok: _Token) -> ReduceStatement:
        frag_tok = self._peek()
        if frag_tok.text not in ("graded", "mixed", "glad"):
            raise self._err("expected a fragment tag ('graded', 'mixed' or 'glad')")
        fragment: Fragment = self._next().text  # type: ignore[assignment]
        self.scope = []
        if fragment == "graded":
            term = self.g_expr()
        elif fragment == "mixed":
            term = self.l_expr()
        else:
            term = self.d_expr()
        self._expect(";")
        return ReduceStatement(fragment, term, self._span(tok))


def parse_module(
    text: str,
    *,
    source: str = "<module>",
    default_config: str | None = None,
) -> SourceModule:
    """Parse one module.  ``default_config`` (an id or path) applies when the
    module has no ``config`` line of its own."""
    return _Parser(text, source, None).parse_module(source, default_config)


# ---------------------------------------------------------------------------
# pretty-printer

_VARIANCE_TOKENS = ("~~", "^^", "vv", "??")


def _show_grade(g: GradeValue) -> str:
    return str(g.value)


def _fresh_display(hint: str, used: Iterable[str]) -> str:
    used = set(used)
    base = hint if hint and hint != "_" else "x"
    if base not in used:
        return base
    k = 1
    while f"{base}{k}" in used:
        k += 1
    return f"{base}{k}"


class _Printer:
    """Renders terms; ``genv``/``lenv`` list in-scope names outermost first."""

    def __init__(self, genv: Sequence[str], lenv: Sequence[str]):
        self.genv = list(genv)
        self.lenv = list(lenv)

    def _used(self) -> set[str]:
        return set(self.genv) | set(self.lenv)

    def _with(self, zone: str, hint: str) -> str:
        name = _fresh_display(hint, self._used())
        (self.genv if zone == "g" else self.lenv).append(name)
        return name

    def _drop(self, zone: str, k: int = 1) -> None:
        env = self.genv if zone == "g" else self.lenv
        del env[-k:]

    def show(self, t: Term, p: int = _P_EXPR) -> str:
        text, level = self._render(t)
        if level < p:
            return f"({text})"
        return text

    def _var(self, env: list[str], ix: int, tag: str) -> str:
        if 0 <= ix < len(env):
            return env[len(env) - 1 - ix]
        return f"{tag}{ix}"

    def _render(self, t: Term) -> tuple[str, int]:
        match t:
            case Var(ix):
                return self._var(self.genv, ix, "!g"), _P_ATOM
            case LVar(ix):
                return self._var(self.lenv, ix, "!l"), _P_ATOM
            case TypeU():
                return "Type", _P_ATOM
            case LinearU():
                return "Lin", _P_ATOM
            case UnitJType():
                return "J", _P_ATOM
            case UnitJ():
                return "j", _P_ATOM
            case ILin():
                return "I", _P_ATOM
            case UnitI():
                return "i", _P_ATOM
            case UnitIM(m):
                return f"I@{m}", _P_ATOM
            case StarM(m):
                return f"*@{m}", _P_ATOM
            case Ascribe(subject, ty):
                return f"{self.show(subject, _P_ARROW)} : {self.show(ty, _P_ASC)}", _P_ASC
            case Lam(name, body):
                shown = self._with("g", name)
                out = f"\\{shown}. {self.show(body)}"
                self._drop("g")
                return out, _P_EXPR
            case LamLin(name, body):
                shown = self._with("l", name)
                out = f"\\{shown}. {self.show(body)}"
                self._drop("l")
                return out, _P_EXPR
            case LamG(name, body):
                shown = self._with("g", name)
                out = f"\\{shown}. {self.show(body)}"
                self._drop("g")
                return out, _P_EXPR
            case UnitJElim(scrut, body):
                return (
                    f"let j = {self.show(scrut)} in {self.show(body)}",
                    _P_EXPR,
                )
            case UnitIElim(scrut, body):
                return (
                    f"let i = {self.show(scrut)} in {self.show(body)}",
                    _P_EXPR,
                )
            case StarElim(scrut, body):
                return (
                    f"let * = {self.show(scrut)} in {self.show(body)}",
                    _P_EXPR,
                )
            case PairElim(n1, n2, scrut, body):
                s = self.show(scrut)
                a = self._with("g", n1)
                b = self._with("g", n2)
                out = f"let ({a}, {b}) = {s} in {self.show(body)}"
                self._drop("g", 2)
                return out, _P_EXPR
            case PairGElim(n1, n2, scrut, body):
                s = self.show(scrut)
                a = self._with("g", n1)
                b = self._with("g", n2)
                out = f"let ({a}, {b}) = {s} in {self.show(body)}"
                self._drop("g", 2)
                return out, _P_EXPR
            case TensorElim(n1, n2, scrut, body):
                s = self.show(scrut)
                a = self._with("l", n1)
                b = self._with("l", n2)
                out = f"let ({a}, {b}) = {s} in {self.show(body)}"
                self._drop("l", 2)
                return out, _P_EXPR
            case FElim(gname, lname, scrut, body):
                s = self.show(scrut)
                a = self._with("g", gname)
                b = self._with("l", lname)
                out = f"let F({a}, {b}) = {s} in {self.show(body)}"
                self._drop("l")
                self._drop("g")
                return out, _P_EXPR
            case Case(q, scrut, left, right):
                return (
                    f"case^{_show_grade(q)} {self.show(scrut, _P_ARROW)} of "
                    f"{self.show(left)}; {self.show(right)}",
                    _P_EXPR,
                )
            case CaseG(q, scrut, left, right):
                return (
                    f"case^{_show_grade(q)}@{_mode_tag_for(q)} {self.show(scrut, _P_ARROW)} of "
                    f"{self.show(left)}; {self.show(right)}",
                    _P_EXPR,
                )
            case GradedArrow(r, name, dom, cod):
                d = self.show(dom)
                shown = self._with("g", name)
                out = f"({shown} :^{_show_grade(r)} {d}) -> {self.show(cod, _P_ARROW)}"
                self._drop("g")
                return out, _P_ARROW
            case BoxTimes(r, name, left, right):
                d = self.show(left)
                shown = self._with("g", name)
                out = f"({shown} :^{_show_grade(r)} {d}) >< {self.show(right, _P_ARROW)}"
                self._drop("g")
                return out, _P_ARROW
            case PiG(q, mode, name, dom, cod):
                d = self.show(dom)
                shown = self._with("g", name)
                out = (
                    f"({shown} :^{_show_grade(q)}@{mode} {d}) -o {self.show(cod, _P_ARROW)}"
                )
                self._drop("g")
                return out, _P_ARROW
            case TensorG(q, mode, name, left, right):
                d = self.show(left)
                shown = self._with("g", name)
                out = (
                    f"({shown} :^{_show_grade(q)}@{mode} {d}) (x) {self.show(right, _P_ARROW)}"
                )
                self._drop("g")
                return out, _P_ARROW
            case FAdj(r, name, dom, body):
                d = self.show(dom)
                shown = self._with("g", name)
                out = f"F({shown} :^{_show_grade(r)} {d}). {self.show(body, _P_ARROW)}"
                self._drop("g")
                return out, _P_ARROW
            case Lollipop(dom, cod):
                return (
                    f"{self.show(dom, _P_SUM)} -o {self.show(cod, _P_ARROW)}",
                    _P_ARROW,
                )
            case BoxPlus(left, right) | OplusG(left, right):
                return (
                    f"{self.show(left, _P_TENSOR)} (+) {self.show(right, _P_SUM)}",
                    _P_SUM,
                )
            case Tensor(left, right):
                return (
                    f"{self.show(left, _P_APP)} (x) {self.show(right, _P_TENSOR)}",
                    _P_TENSOR,
                )
            case App(fn, arg) | AppLin(fn, arg) | AppG(fn, arg):
                return f"{self.show(fn, _P_APP)} {self.show(arg, _P_ATOM)}", _P_APP
            case Inl(body) | InlG(body):
                return f"inl {self.show(body, _P_ATOM)}", _P_APP
            case Inr(body) | InrG(body):
                return f"inr {self.show(body, _P_ATOM)}", _P_APP
            case GAdj(body):
                return f"G {self.show(body, _P_ATOM)}", _P_APP
            case GWrap(body):
                return f"Gwrap {self.show(body, _P_ATOM)}", _P_APP
            case GInv(body):
                return f"Ginv {self.show(body, _P_ATOM)}", _P_APP
            case ShiftUp(lo, hi, body):
                return f"up[{lo}->{hi}] {self.show(body, _P_ATOM)}", _P_APP
            case ShiftDown(lo, hi, body):
                return f"down[{lo}->{hi}] {self.show(body, _P_ATOM)}", _P_APP
            case Pair(left, right) | TensorPair(left, right) | PairG(left, right):
                return f"({self.show(left)}, {self.show(right)})", _P_ATOM
            case FPair(graded_part, linear_part):
                return f"F({self.show(graded_part)}, {self.show(linear_part)})", _P_ATOM
            case _:
                raise CheckError(
                    Code.SHAPE_MISMATCH, f"no surface syntax for {type(t).__name__}"
                )


_MODE_TAGS: contextvars.ContextVar[Mapping[str, str]] = contextvars.ContextVar(
    "gradal_mode_tags", default={}
)


def _mode_tag_for(q: GradeValue) -> str:
    """The mode whose semiring interprets a many-mode case grade.  Printing a
    checker-independent term needs the active theory's mode list, registered
    by the caller (any mode with the right semiring is equivalent: only the
    semiring takes part in checking)."""
    tag = _MODE_TAGS.get().get(q.semiring.id)
    if tag is None:
        raise CheckError(
            Code.UNKNOWN_MODE,
            f"no registered mode grades in semiring '{q.semiring.id}'",
            payload={"semiring": q.semiring.id},
        )
    return tag


def register_mode_tags(theory: ModeTheory) -> None:
    """Make the printer aware of the active theory (for case-grade tags).

    The registration is scoped to the current thread/context, so parallel
    checks of modules with different theories do not interfere."""
    tags: dict[str, str] = {}
    for mode_id, mode in theory.modes.items():
        tags.setdefault(mode.semiring.id, mode_id)
    _MODE_TAGS.set(tags)


def print_term(
    t: Term,
    *,
    gnames: Sequence[str] = (),
    lnames: Sequence[str] = (),
) -> str:
    """Render a term; free variables resolve in the given scopes (outermost
    first)."""
    return _Printer(gnames, lnames).show(t)


# ---------------------------------------------------------------------------
# judgment / derivation rendering


def _show_vector(d: GradeVector) -> str:
    return "[" + ", ".join(_show_grade(g) for g in d.entries) + "]"


def _show_graded_ctx(ctx: GradedContext) -> str:
    if not ctx.entries:
        return "."
    parts = []
    names: list[str] = []
    for name, ty in ctx.entries:
        parts.append(f"{name} : {print_term(ty, gnames=names, lnames=()) }")
        names.append(name)
    return ", ".join(parts)


def _show_linear_ctx(gnames: Sequence[str], ctx: LinearContext) -> str:
    if not ctx.entries:
        return "."
    return ", ".join(
        f"{name} : {print_term(ty, gnames=gnames, lnames=())}" for name, ty in ctx.entries
    )


def _show_glad_ctx(ctx: GladContext) -> str:
    if not ctx.entries:
        return "."
    parts = []
    names: list[str] = []
    for name, ty, _mode in ctx.entries:
        parts.append(f"{name} : {print_term(ty, gnames=names, lnames=())}")
        names.append(name)
    return ", ".join(parts)


def _show_mode_vector(ctx: GladContext) -> str:
    return "[" + ", ".join(mode for _, _, mode in ctx.entries) + "]"


def render_judgment(j: Judgment) -> str:
    """One judgment in the surface notation (re-parseable inside asserts)."""
    match j:
        case GradedTyping(delta, gctx, subject, type_):
            names = gctx.names()
            return (
                f"{_show_vector(delta)} (.) {_show_graded_ctx(gctx)} |-G "
                f"{print_term(subject, gnames=names, lnames=())} : "
                f"{print_term(type_, gnames=names, lnames=())}"
            )
        case MixedTyping(delta, gctx, lctx, subject, type_):
            gnames = gctx.names()
            lnames = lctx.names()
            return (
                f"{_show_vector(delta)} (.) {_show_graded_ctx(gctx)} ; "
                f"{_show_linear_ctx(gnames, lctx)} |-M "
                f"{print_term(subject, gnames=gnames, lnames=lnames)} : "
                f"{print_term(type_, gnames=gnames, lnames=())}"
            )
        case GladTyping(delta, ctx, mode, subject, type_):
            names = ctx.names()
            return (
                f"{_show_vector(delta)} | {_show_mode_vector(ctx)} (.) "
                f"{_show_glad_ctx(ctx)} |-_{mode} "
                f"{print_term(subject, gnames=names, lnames=())} : "
                f"{print_term(type_, gnames=names, lnames=())}"
            )
        case GradedCtxWF(delta, gctx):
            return f"{_show_vector(delta)} (.) {_show_graded_ctx(gctx)} ctx"
        case MixedCtxWF(delta, gctx, lctx):
            return (
                f"{_show_vector(delta)} (.) {_show_graded_ctx(gctx)} ; "
                f"{_show_linear_ctx(gctx.names(), lctx)} ctx"
            )
        case GladCtxWF(delta, ctx):
            return (
                f"{_show_vector(delta)} | {_show_mode_vector(ctx)} (.) "
                f"{_show_glad_ctx(ctx)} ctx"
            )
        case _:
            raise CheckError(Code.SHAPE_MISMATCH, f"unrenderable judgment {type(j).__name__}")


def render_derivation(der: Derivation, indent: int = 0) -> str:
    """A full tree, one ``rule: judgment`` line per node, two-space nesting."""
    lines = [f"{'  ' * indent}{der.rule}: {render_judgment(der.conclusion)}"]
    for p in der.premises:
        lines.append(render_derivation(p, indent + 1))
    return "\n".join(lines)


def render_trace(trace: ReductionTrace, fragment: Fragment) -> str:
    """A reduction trace: initial term, one line per step, final form."""
    if trace.steps:
        first = trace.steps[0].before
    else:
        first = trace.final
    lines = [f"initial: {print_term(first)}"]
    for st in trace.steps:
        lines.append(f"{st.rule} at {st.position}: {print_term(st.after)}")
    if trace.exhausted:
        lines.append(f"fuel exhausted after {len(trace.steps)} steps")
    else:
        lines.append(f"normal form: {print_term(trace.final)}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# module checking


@dataclass(frozen=True)
class ModuleReport:
    """Per-module outcome: ordered diagnostics plus simple counts."""

    path: str
    diagnostics: tuple[Diagnostic, ...]
    checked: int
    failed: int


def _error_diag(span: Span, e: CheckError) -> Diagnostic:
    return Diagnostic("error", e.code, span, e.message, e.rule, dict(e.payload))


def _dump_name(stem: str, index: int, label: str) -> str:
    return f"{stem}.{index:03d}.{label}.der"


def check_module(
    mod: SourceModule,
    *,
    fuel: int | None = None,
    strict_glad: bool = False,
    dump: Callable[[str, str], None] | None = None,
) -> ModuleReport:
    """Check every declaration and assertion; ``dump`` receives
    ``(file name, rendered derivation)`` for each accepted statement."""
    if fuel is None:
        fuel = default_fuel()
    diags: list[Diagnostic] = []
    checked = 0
    failed = 0
    stem = mod.path.rsplit("/", 1)[-1]
    stem = stem[: -len(".gradal")] if stem.endswith(".gradal") else stem

    def semiring_cfg(span: Span) -> CheckerConfig:
        if not isinstance(mod.config, SemiringSpec):
            raise CheckError(
                Code.PARSE_ERROR,
                "graded/mixed statements need a semiring config",
                payload={"file": span.file},
            )
        return CheckerConfig(mod.config, fuel=fuel)

    def theory_cfg(span: Span) -> GladCheckerConfig:
        if not isinstance(mod.config, ModeTheory):
            raise CheckError(
                Code.PARSE_ERROR,
                "glad statements need a mode-theory config",
                payload={"file": span.file},
            )
        register_mode_tags(mod.config)
        return GladCheckerConfig(mod.config, fuel=fuel, strict_types=strict_glad)

    def run(stmt: Declaration | Assertion) -> Derivation:
        if isinstance(stmt, Declaration):
            if stmt.fragment == "graded":
                return check_graded(
                    semiring_cfg(stmt.span), vec(()), GradedContext(()), stmt.term, stmt.type_
                )
            if stmt.fragment == "mixed":
                return check_mixed(
                    semiring_cfg(stmt.span),
                    vec(()),
                    GradedContext(()),
                    LinearContext(()),
                    stmt.term,
                    stmt.type_,
                )
            assert stmt.mode is not None
            return check_glad(
                theory_cfg(stmt.span), vec(()), GladContext(()), stmt.mode, stmt.term, stmt.type_
            )
        if stmt.fragment == "graded":
            assert stmt.gctx is not None
            return check_graded(
                semiring_cfg(stmt.span), stmt.delta, stmt.gctx, stmt.term, stmt.type_
            )
        if stmt.fragment == "mixed":
            assert stmt.gctx is not None and stmt.lctx is not None
            return check_mixed(
                semiring_cfg(stmt.span), stmt.delta, stmt.gctx, stmt.lctx, stmt.term, stmt.type_
            )
        assert stmt.ctx is not None and stmt.mode is not None
        return check_glad(
            theory_cfg(stmt.span), stmt.delta, stmt.ctx, stmt.mode, stmt.term, stmt.type_
        )

    for index, stmt in enumerate(mod.statements):
        if isinstance(stmt, ReduceStatement):
            continue
        checked += 1
        label = stmt.name if isinstance(stmt, Declaration) else f"assert-{stmt.fragment}"
        try:
            der = run(stmt)
        except CheckError as e:
            if isinstance(stmt, Assertion) and stmt.expect == "reject":
                if stmt.expected_code is not None and e.code != stmt.expected_code:
                    failed += 1
                    diags.append(
                        Diagnostic(
                            "error",
                            e.code,
                            stmt.span,
                            f"expected rejection with code "
                            f"{stmt.expected_code.value}, got {e.code.value}: {e.message}",
                            e.rule,
                            dict(e.payload),
                        )
                    )
                continue
            failed += 1
            diags.append(_error_diag(stmt.span, e))
            continue
        if isinstance(stmt, Assertion) and stmt.expect == "reject":
            failed += 1
            diags.append(
                Diagnostic(
                    "error",
                    Code.SHAPE_MISMATCH,
                    stmt.span,
                    "expected this judgment to be rejected, but it was accepted",
                )
            )
            continue
        if dump is not None:
            dump(_dump_name(stem, index, label), render_derivation(der) + "\n")

    diags.sort(key=_sort_key)
    return ModuleReport(mod.path, tuple(diags), checked, failed)


def reduce_module(mod: SourceModule, *, fuel: int | None = None) -> list[tuple[ReduceStatement, ReductionTrace]]:
    """Run every ``reduce`` statement; returns the traces in file order."""
    if isinstance(mod.config, ModeTheory):
        register_mode_tags(mod.config)
    out = []
    for stmt in mod.statements:
        if isinstance(stmt, ReduceStatement):
            out.append((stmt, normalize(stmt.term, fuel)))
    return out
