"""Text DSL for expressions and third-order systems.

Grammar (Pratt, lowest to highest binding)::

    + -        left, 10
    * /        left, 20
    unary -    prefix, 25
    ^          right, 30   (exponent must reduce to an integer constant)

Names are ``x``, ``y<i>``, ``p<i>``, ``q<i>`` plus the aliases ``y<i>'``
and ``y<i>''`` for ``p<i>`` and ``q<i>``. Calls: ``sin cos exp ln``.

A system file is a sequence of statements separated by newlines or ``;``::

    m = 2
    f1 = q2^2     # comment
    f2 = 0
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import DimensionTooSmall, DslSyntaxError, IndexOutOfRange, UnknownFunction
from .expr import FUNCTIONS, Const, Expr, Var, add, apply, mul, neg, power, render, var

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*'{0,2})
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)

_VAR_NAME = re.compile(r"([ypq])(\d+)$")
_ALIAS = re.compile(r"y(\d+)('{1,2})$")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    col: int  # 1-based


def tokenize(src: str, lineno: int = 1, col0: int = 0) -> list:
    out = []
    pos = 0
    while pos < len(src):
        mt = _TOKEN.match(src, pos)
        if mt is None:
            raise DslSyntaxError(f"unexpected character {src[pos]!r}", lineno, col0 + pos + 1, src)
        kind = mt.lastgroup
        if kind != "ws":
            out.append(Token(kind, mt.group(), col0 + pos + 1))
        pos = mt.end()
    out.append(Token("end", "", col0 + len(src) + 1))
    return out


_INFIX = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_UNARY_BP = 25


class _Parser:
    def __init__(self, src: str, m: int | None, lineno: int, col0: int, line_text: str):
        self.src = line_text
        self.lineno = lineno
        self.m = m
        self.toks = tokenize(src, lineno, col0)
        self.i = 0

    def error(self, msg, tok=None, cls=DslSyntaxError):
        tok = tok or self.toks[self.i]
        if issubclass(cls, DslSyntaxError):
            return cls(msg, self.lineno, tok.col, self.src)
        return cls(f"line {self.lineno}, column {tok.col}: {msg}")

    def peek(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.next()
        if t.text != text:
            found = t.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}", t)
        return t

    def parse(self) -> Expr:
        e = self.expr(0)
        t = self.peek()
        if t.kind != "end":
            raise self.error(f"unexpected {t.text!r}", t)
        return e

    def expr(self, rbp: int) -> Expr:
        left = self.prefix(self.next())
        while True:
            t = self.peek()
            bp = _INFIX.get(t.text) if t.kind == "op" else None
            if bp is None or bp <= rbp:
                return left
            self.next()
            if t.text == "^":
                left = power(left, self.exponent(t))
            else:
                right = self.expr(bp)
                if t.text == "+":
                    left = add(left, right)
                elif t.text == "-":
                    left = add(left, neg(right))
                elif t.text == "*":
                    left = mul(left, right)
                else:
                    left = mul(left, power(right, -1))

    def exponent(self, caret: Token) -> int:
        start = self.peek()
        e = self.expr(_INFIX["^"] - 1)
        if not isinstance(e, Const) or e.value.denominator != 1:
            raise self.error("exponent must be an integer constant", start)
        return int(e.value)

    def prefix(self, t: Token) -> Expr:
        if t.kind == "num":
            return Const(Fraction(t.text))
        if t.text == "-":
            return neg(self.expr(_UNARY_BP))
        if t.text == "+":
            return self.expr(_UNARY_BP)
        if t.text == "(":
            e = self.expr(0)
            self.expect(")")
            return e
        if t.kind == "name":
            if self.peek().text == "(":
                if t.text not in FUNCTIONS:
                    raise self.error(f"unknown function {t.text!r}", t, UnknownFunction)
                self.next()
                arg = self.expr(0)
                self.expect(")")
                return apply(t.text, arg)
            return var(self.variable(t))
        found = t.text or "end of input"
        raise self.error(f"unexpected {found!r}", t)

    def variable(self, t: Token) -> Var:
        name = t.text
        if name == "x":
            return Var("x")
        mt = _ALIAS.match(name)
        if mt:
            kind, idx = ("p" if len(mt.group(2)) == 1 else "q"), int(mt.group(1))
        else:
            mt = _VAR_NAME.match(name)
            if not mt:
                raise self.error(f"unknown name {name!r}", t)
            kind, idx = mt.group(1), int(mt.group(2))
        if idx < 1 or (self.m is not None and idx > self.m):
            bound = f" (m = {self.m})" if self.m is not None else ""
            raise self.error(f"index of {name!r} out of range{bound}", t, IndexOutOfRange)
        return Var(kind, idx)


def parse_expr(text: str, m: int | None = None) -> Expr:
    """Parse one expression; with ``m`` given, variable indices are bounded by it."""
    return _Parser(text, m, 1, 0, text).parse()


_M_STMT = re.compile(r"\s*m\s*=\s*(\S+)\s*$")
_F_STMT = re.compile(r"\s*f(\d+)\s*=")


def _statements(text: str):
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0]
        col = 0
        for piece in body.split(";"):
            if piece.strip():
                yield lineno, col, piece, line
            col += len(piece) + 1


def parse_system(text: str):
    """Parse the system DSL into an :class:`~cartan_ode.jet.OdeSystem`."""
    from .jet import OdeSystem

    stmts = list(_statements(text))
    m = None
    for lineno, col, piece, line in stmts:
        mt = _M_STMT.match(piece)
        if mt:
            if m is not None:
                raise DslSyntaxError("m declared twice", lineno, col + 1, line)
            try:
                m = int(mt.group(1))
            except ValueError:
                raise DslSyntaxError("m must be an integer", lineno, col + mt.start(1) + 1, line) from None
            if m < 2:
                raise DimensionTooSmall(f"m = {m}; systems need m >= 2")
    if m is None:
        raise DslSyntaxError("missing 'm = <int>' declaration", 1, 1, text.splitlines()[0] if text else "")

    rhs: dict = {}
    for lineno, col, piece, line in stmts:
        if _M_STMT.match(piece):
            continue
        mt = _F_STMT.match(piece)
        if not mt:
            lead = len(piece) - len(piece.lstrip())
            raise DslSyntaxError("expected 'f<i> = <expr>' or 'm = <int>'", lineno, col + lead + 1, line)
        i = int(mt.group(1))
        if not 1 <= i <= m:
            raise IndexOutOfRange(f"line {lineno}: f{i} outside 1..{m}")
        if i in rhs:
            raise DslSyntaxError(f"f{i} defined twice", lineno, col + 1, line)
        rhs[i] = _Parser(piece[mt.end():], m, lineno, col + mt.end(), line).parse()
    missing = [i for i in range(1, m + 1) if i not in rhs]
    if missing:
        names = ", ".join(f"f{i}" for i in missing)
        raise DslSyntaxError(f"missing definition of {names}", len(text.splitlines()) or 1, 1, "")
    return OdeSystem(m, tuple(rhs[i] for i in range(1, m + 1)))


def render_system(sys) -> str:
    lines = [f"m = {sys.m}"]
    lines += [f"f{i} = {render(e)}" for i, e in enumerate(sys.f, 1)]
    return "\n".join(lines) + "\n"
