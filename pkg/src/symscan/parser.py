"""Recursive-descent parser for the ``.fg`` model language.

The grammar is small enough that a hand-written tokenizer plus one method per
production is the clearest implementation.  Every statement and every error
carries a :class:`SourceSpan`.

Example::

    model m {
      real a; real b; real c;
      c = plus(a, b);
      observe c = 3;
    }
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Union

__all__ = [
    "SourceSpan",
    "ParseError",
    "ModelSyntaxError",
    "DuplicateDeclaration",
    "LVal",
    "Literal",
    "RangeDecl",
    "VarDecl",
    "ObserveDecl",
    "FactorStmt",
    "IfStmt",
    "Program",
    "parse",
    "pretty",
]


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 0

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class ParseError(Exception):
    """Base class for errors raised while reading model text."""

    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


class ModelSyntaxError(ParseError):
    def __init__(self, span: SourceSpan, expected: Iterable[str], found: str):
        self.expected = frozenset(expected)
        exp = " or ".join(repr(e) for e in sorted(self.expected))
        super().__init__(f"expected {exp}, found {found!r}", span)


class DuplicateDeclaration(ParseError):
    def __init__(self, name: str, span: SourceSpan):
        self.name = name
        super().__init__(f"duplicate declaration of {name!r}", span)


# ---------------------------------------------------------------- AST nodes

Index = Union[str, int]


@dataclass(frozen=True)
class LVal:
    name: str
    indices: tuple[Index, ...] = ()
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Literal:
    value: Union[Fraction, bool]
    span: SourceSpan | None = field(default=None, compare=False)


Arg = Union[LVal, Literal]


@dataclass(frozen=True)
class RangeDecl:
    name: str
    size: int
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class VarDecl:
    name: str
    type: str  # "real" | "real+" | "bool" | "discrete"
    value_range: str | None = None
    dims: tuple[str, ...] = ()
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ObserveDecl:
    target: LVal
    value: Literal | None = None
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class FactorStmt:
    lhs: LVal
    op: str  # "=" deterministic, "~" distribution
    kind: str
    args: tuple[Arg, ...] = ()
    modifier: str | None = None  # "likelihood" | "prior"
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class IfStmt:
    cond: LVal
    then: tuple = ()
    orelse: tuple = ()
    span: SourceSpan | None = field(default=None, compare=False)


Statement = Union[RangeDecl, VarDecl, ObserveDecl, FactorStmt, IfStmt]


@dataclass(frozen=True)
class Program:
    name: str
    statements: tuple[Statement, ...]


# ---------------------------------------------------------------- tokenizer

KEYWORDS = {
    "model", "range", "real", "bool", "discrete", "observe", "if", "else",
    "likelihood", "prior", "true", "false",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<number>\d+\.\d+|\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[{}()\[\],;=~/+\-])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "kw", "number", "punct", "eof"
    text: str
    span: SourceSpan


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            span = SourceSpan(line, pos - line_start + 1, 1)
            raise ModelSyntaxError(span, ["token"], text[pos])
        kind = m.lastgroup
        tok = m.group()
        span = SourceSpan(line, pos - line_start + 1, len(tok))
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ident":
            tokens.append(Token("kw" if tok in KEYWORDS else "ident", tok, span))
        elif kind in ("number", "punct"):
            tokens.append(Token(kind, tok, span))
        pos = m.end()
    tokens.append(Token("eof", "<end of input>", SourceSpan(line, pos - line_start + 1, 0)))
    return tokens


# ---------------------------------------------------------------- parser


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.declared: set[str] = set()

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def _is(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("punct", "kw") and t.text == text

    def _fail(self, expected: Iterable[str]):
        raise ModelSyntaxError(self.tok.span, expected, self.tok.text)

    def expect(self, text: str) -> Token:
        if not self._is(text):
            self._fail([text])
        return self._advance()

    def _advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            self._fail(["identifier"])
        return self._advance()

    def integer(self) -> int:
        if self.tok.kind != "number" or "." in self.tok.text:
            self._fail(["integer"])
        return int(self._advance().text)

    # model := "model" IDENT "{" stmt* "}"
    def program(self) -> Program:
        self.expect("model")
        name = self.ident().text
        self.expect("{")
        stmts = self.block()
        self.expect("}")
        if self.tok.kind != "eof":
            self._fail(["<end of input>"])
        return Program(name, tuple(stmts))

    def block(self) -> list:
        out = []
        while not self._is("}") and self.tok.kind != "eof":
            out.append(self.stmt())
        return out

    def stmt(self) -> Statement:
        t = self.tok
        if self._is("range"):
            return self.range_decl()
        if self._is("real") or self._is("bool") or self._is("discrete"):
            return self.var_decl()
        if self._is("observe"):
            return self.obs_decl()
        if self._is("if"):
            return self.if_stmt()
        if t.kind == "ident":
            return self.factor_stmt()
        self._fail(["range", "real", "real+", "bool", "discrete", "observe", "if", "identifier", "}"])

    def _declare(self, tok: Token) -> None:
        if tok.text in self.declared:
            raise DuplicateDeclaration(tok.text, tok.span)
        self.declared.add(tok.text)

    def range_decl(self) -> RangeDecl:
        start = self.expect("range").span
        name = self.ident()
        self.expect("=")
        size = self.integer()
        self.expect(";")
        self._declare(name)
        return RangeDecl(name.text, size, start)

    def var_decl(self) -> VarDecl:
        start = self.tok.span
        value_range = None
        if self._is("real"):
            self._advance()
            if self._is("+"):
                self._advance()
                vtype = "real+"
            else:
                vtype = "real"
        elif self._is("bool"):
            self._advance()
            vtype = "bool"
        else:
            self.expect("discrete")
            self.expect("(")
            value_range = self.ident().text
            self.expect(")")
            vtype = "discrete"
        name = self.ident()
        dims: list[str] = []
        if self._is("["):
            self._advance()
            dims.append(self.ident().text)
            while self._is(","):
                self._advance()
                dims.append(self.ident().text)
            self.expect("]")
        self.expect(";")
        self._declare(name)
        return VarDecl(name.text, vtype, value_range, tuple(dims), start)

    def obs_decl(self) -> ObserveDecl:
        start = self.expect("observe").span
        target = self.lval()
        value = None
        if self._is("="):
            self._advance()
            value = self.literal()
        elif not self._is(";"):
            self._fail(["=", ";"])
        self.expect(";")
        return ObserveDecl(target, value, start)

    def if_stmt(self) -> IfStmt:
        start = self.expect("if").span
        self.expect("(")
        cond = self.lval()
        self.expect(")")
        self.expect("{")
        then = self.block()
        self.expect("}")
        orelse: list = []
        if self._is("else"):
            self._advance()
            self.expect("{")
            orelse = self.block()
            self.expect("}")
        return IfStmt(cond, tuple(then), tuple(orelse), start)

    def factor_stmt(self) -> FactorStmt:
        lhs = self.lval()
        if not (self._is("=") or self._is("~")):
            self._fail(["=", "~"])
        op = self._advance().text
        kind = self.ident().text
        self.expect("(")
        args: list[Arg] = []
        if not self._is(")"):
            args.append(self.arg())
            while not self._is(")"):
                if not self._is(","):
                    self._fail([",", ")"])
                self._advance()
                args.append(self.arg())
        self.expect(")")
        modifier = None
        if op == "~" and (self._is("likelihood") or self._is("prior")):
            modifier = self._advance().text
        elif not self._is(";"):
            self._fail(["likelihood", "prior", ";"] if op == "~" else [";"])
        self.expect(";")
        return FactorStmt(lhs, op, kind, tuple(args), modifier, lhs.span)

    def arg(self) -> Arg:
        if self.tok.kind == "ident":
            return self.lval()
        return self.literal()

    def lval(self) -> LVal:
        name = self.ident()
        idx: list[Index] = []
        if self._is("["):
            self._advance()
            idx.append(self.index())
            while self._is(","):
                self._advance()
                idx.append(self.index())
            self.expect("]")
        return LVal(name.text, tuple(idx), name.span)

    def index(self) -> Index:
        if self.tok.kind == "ident":
            return self._advance().text
        if self.tok.kind == "number":
            return self.integer()
        self._fail(["identifier", "integer"])

    # literal := rational | "true" | "false"
    def literal(self) -> Literal:
        span = self.tok.span
        if self._is("true") or self._is("false"):
            return Literal(self._advance().text == "true", span)
        negative = False
        if self._is("-"):
            self._advance()
            negative = True
        if self.tok.kind != "number":
            self._fail(["number", "true", "false"])
        value = Fraction(self._advance().text)
        if self._is("/"):
            self._advance()
            den = self.integer()
            if den == 0:
                raise ParseError("zero denominator", span)
            value = value / den
        return Literal(-value if negative else value, span)


def parse(text: str) -> Program:
    """Parse model text into a :class:`Program`.

    Raises :class:`ModelSyntaxError` or :class:`DuplicateDeclaration`, both
    carrying the span of the offending token.
    """
    return _Parser(text).program()


# ---------------------------------------------------------------- printing


def _fmt_literal(lit: Literal) -> str:
    v = lit.value
    if isinstance(v, bool):
        return "true" if v else "false"
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def _fmt_lval(lv: LVal) -> str:
    if not lv.indices:
        return lv.name
    return f"{lv.name}[{', '.join(str(i) for i in lv.indices)}]"


def _fmt_arg(a: Arg) -> str:
    return _fmt_literal(a) if isinstance(a, Literal) else _fmt_lval(a)


def _pretty_stmt(s: Statement, depth: int) -> list[str]:
    pad = "  " * depth
    if isinstance(s, RangeDecl):
        return [f"{pad}range {s.name} = {s.size};"]
    if isinstance(s, VarDecl):
        t = f"discrete({s.value_range})" if s.type == "discrete" else s.type
        dims = f"[{', '.join(s.dims)}]" if s.dims else ""
        return [f"{pad}{t} {s.name}{dims};"]
    if isinstance(s, ObserveDecl):
        val = f" = {_fmt_literal(s.value)}" if s.value is not None else ""
        return [f"{pad}observe {_fmt_lval(s.target)}{val};"]
    if isinstance(s, FactorStmt):
        args = ", ".join(_fmt_arg(a) for a in s.args)
        mod = f" {s.modifier}" if s.modifier else ""
        return [f"{pad}{_fmt_lval(s.lhs)} {s.op} {s.kind}({args}){mod};"]
    lines = [f"{pad}if ({_fmt_lval(s.cond)}) {{"]
    for sub in s.then:
        lines += _pretty_stmt(sub, depth + 1)
    if s.orelse:
        lines.append(f"{pad}}} else {{")
        for sub in s.orelse:
            lines += _pretty_stmt(sub, depth + 1)
    lines.append(f"{pad}}}")
    return lines


def pretty(program: Program) -> str:
    lines = [f"model {program.name} {{"]
    for s in program.statements:
        lines += _pretty_stmt(s, 1)
    lines.append("}")
    return "\n".join(lines) + "\n"
