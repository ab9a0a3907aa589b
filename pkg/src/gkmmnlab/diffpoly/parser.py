"""Recursive-descent parser for operator and polynomial expressions.

Grammar (whitespace-insensitive)::

    expr  := ['+'|'-'] term (('+'|'-') term)*
    term  := power (('*'|'/') power)*
    power := atom ['^' ['-'] INT]
    atom  := NUMBER | 'I' | 'Dx' | 'Dy' | SYMBOL | '(' expr ')'

``SYMBOL`` is an identifier with an optional derivative subscript, e.g.
``G_xy`` or ``u_t``.  Products compose left to right, so ``Dx*G`` means
``G*Dx + G_x``.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .algebra import QI, DiffPolynomial, OperatorExpr, Sym, compose

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<name>[A-Za-z][A-Za-z0-9]*(?:_[txy]+)?)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class UnknownTokenError(ParseError):
    pass


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise UnknownTokenError(f"unknown token {text[pos]!r}", len(text[:pos].encode()))
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), len(text[:pos].encode())))
        pos = m.end()
    out.append(("end", "", len(text.encode())))
    return out


def _symbol(token: str) -> Sym:
    name, _, sub = token.partition("_")
    return Sym(name, sub.count("t"), sub.count("x"), sub.count("y"))


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, off = self.take()
        if text != value:
            raise ParseError(f"expected {value!r}, found {text or 'end of input'!r}", off)

    def parse(self) -> OperatorExpr:
        out = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", off)
        return out

    def expr(self) -> OperatorExpr:
        sign = 1
        if self.peek()[1] in "+-" and self.peek()[0] == "op":
            sign = -1 if self.take()[1] == "-" else 1
        out = self.term()
        if sign < 0:
            out = -out
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> OperatorExpr:
        out = self.power()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op, off = self.take()[1], self.peek()[2]
            rhs = self.power()
            if op == "*":
                out = compose(out, rhs)
            else:
                c = _constant(rhs)
                if c is None or c == 0:
                    raise ParseError("division only by a nonzero constant", off)
                out = out.map_coeffs(lambda p: p.scale(Fraction(1) / c if not isinstance(c, QI) else QI(1) / c))
        return out

    def power(self) -> OperatorExpr:
        off = self.peek()[2]
        base = self.atom()
        if not (self.peek()[0] == "op" and self.peek()[1] == "^"):
            return base
        self.take()
        neg = False
        if self.peek()[1] == "-":
            self.take()
            neg = True
        kind, text, eoff = self.take()
        if kind != "num" or "." in text:
            raise ParseError("exponent must be an integer", eoff)
        n = int(text)
        if neg:
            poly = _multiplication(base)
            if poly is None or len(poly.terms) != 1:
                raise ParseError("negative powers apply only to single monomials", off)
            return OperatorExpr.mult(poly ** (-n))
        out = OperatorExpr.identity()
        for _ in range(n):
            out = compose(out, base)
        return out

    def atom(self) -> OperatorExpr:
        kind, text, off = self.take()
        if kind == "num":
            return OperatorExpr.mult(Fraction(text))
        if kind == "name":
            if text == "Dx":
                return OperatorExpr.dx()
            if text == "Dy":
                return OperatorExpr.dy()
            if text == "I":
                return OperatorExpr.mult(DiffPolynomial.const(QI(0, 1)))
            return OperatorExpr.mult(DiffPolynomial.sym(_symbol(text)))
        if text == "(":
            out = self.expr()
            self.expect(")")
            return out
        raise ParseError(f"unexpected {text or 'end of input'!r}", off)


def _multiplication(op: OperatorExpr):
    keys = set(op.coeffs)
    if not keys:
        return DiffPolynomial()
    if keys == {(0, 0)}:
        return op[(0, 0)]
    return None


def _constant(op: OperatorExpr):
    p = _multiplication(op)
    return None if p is None else p.constant_value()


def parse_operator(text: str) -> OperatorExpr:
    """Parse ``text`` into a normalized :class:`OperatorExpr`."""
    return _Parser(text).parse()


def parse_poly(text: str) -> DiffPolynomial:
    """Parse a differential polynomial (an operator without derivative part)."""
    op = parse_operator(text)
    p = _multiplication(op)
    if p is None:
        raise ParseError("expression contains derivative operators", 0)
    return p
