"""Recursive-descent parser for the expression grammar.

::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' atom)? | '-' factor
    atom   := rational | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
    rational := integer ('/' integer)?

A literal ``a/b`` is read as one rational only where a factor may begin a
product; after an explicit ``/`` the divisor is a single integer so that
``t/2/3`` means ``(t/2)/3``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from . import core

__all__ = ["ParseError", "Parser", "parse"]

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9_]*)|(.))")
_DERIV = re.compile(r"^(.*?)((?:_\d+)+)$")


class ParseError(ValueError):
    """Malformed input; ``offset`` is the 0-based character position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.message = message
        self.offset = offset


class Parser:
    """A parsing session.

    Abstract-function arities are fixed on first use and remembered for
    the lifetime of the session, so one session can read several related
    expressions consistently.
    """

    def __init__(self, arities: dict[str, int] | None = None):
        self.arities: dict[str, int] = dict(arities or {})

    def parse(self, text: str) -> core.Expr:
        self._tokens = self._lex(text)
        self._pos = 0
        self._end = len(text)
        e = self._expr()
        kind, value, offset = self._peek()
        if kind != "end":
            raise ParseError(f"unexpected {value!r}", offset)
        return e

    # -- lexing

    @staticmethod
    def _lex(text: str):
        tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                break
            if m.group(1) is not None:
                tokens.append(("int", m.group(1), m.start(1)))
            elif m.group(2) is not None:
                tokens.append(("ident", m.group(2), m.start(2)))
            elif m.group(3) is not None:
                ch = m.group(3)
                if ch not in "+-*/^(),":
                    raise ParseError(f"unexpected character {ch!r}", m.start(3))
                tokens.append((ch, ch, m.start(3)))
            pos = m.end()
        tokens.append(("end", "end of input", len(text.rstrip()) if text.strip() else len(text)))
        return tokens

    def _peek(self):
        return self._tokens[self._pos]

    def _next(self):
        tok = self._tokens[self._pos]
        self._pos += 1
        return tok

    def _expect(self, kind: str):
        tok = self._next()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    # -- grammar

    def _expr(self) -> core.Expr:
        terms = [self._term()]
        while self._peek()[0] in "+-" and self._peek()[0] != "end":
            op = self._next()[0]
            t = self._term()
            terms.append(t if op == "+" else core.neg(t))
        return core.add(*terms)

    def _term(self) -> core.Expr:
        factors = [self._factor()]
        while self._peek()[0] in ("*", "/"):
            op = self._next()[0]
            if op == "*":
                factors.append(self._factor())
            else:
                factors.append(core.power(self._factor(divisor=True), core.MINUS_ONE))
        return core.mul(*factors)

    def _factor(self, divisor: bool = False) -> core.Expr:
        if self._peek()[0] == "-":
            self._next()
            return core.neg(self._factor(divisor))
        base = self._atom(divisor)
        if self._peek()[0] == "^":
            self._next()
            return core.power(base, self._atom())
        return base

    def _atom(self, divisor: bool = False) -> core.Expr:
        kind, value, offset = self._next()
        if kind == "int":
            n = Fraction(int(value))
            if not divisor and self._peek()[0] == "/" and self._tokens[self._pos + 1][0] == "int":
                self._next()
                _, den, den_offset = self._next()
                if int(den) == 0:
                    raise ParseError("zero denominator", den_offset)
                n = n / int(den)
            return core.num(n)
        if kind == "ident":
            if self._peek()[0] != "(":
                if value in core.ELEMENTARY:
                    raise ParseError(f"function {value!r} needs an argument", self._peek()[2])
                return core.var(value)
            self._next()
            args = [self._expr()]
            while self._peek()[0] == ",":
                self._next()
                args.append(self._expr())
            self._expect(")")
            return self._call(value, args, offset)
        if kind == "(":
            e = self._expr()
            self._expect(")")
            return e
        raise ParseError(f"unexpected {value!r}", offset)

    def _call(self, name: str, args: list, offset: int) -> core.Expr:
        if name in core.ELEMENTARY:
            if len(args) != 1:
                raise ParseError(f"{name} takes one argument", offset)
            return core.fn(name, args[0])
        derivs = None
        m = _DERIV.match(name)
        if m and m.group(1):
            marks = tuple(int(d) for d in m.group(2).split("_")[1:])
            if len(marks) == len(args):
                name, derivs = m.group(1), marks
        if name in core.ELEMENTARY:
            raise ParseError(f"derivative marker on elementary function {name!r}", offset)
        known = self.arities.setdefault(name, len(args))
        if known != len(args):
            raise ParseError(f"{name} expects {known} argument(s), got {len(args)}", offset)
        return core.afn(name, args, derivs)


def parse(text: str, arities: dict[str, int] | None = None) -> core.Expr:
    """Parse ``text`` in a fresh session (optionally pre-seeded arities)."""
    return Parser(arities).parse(text)
