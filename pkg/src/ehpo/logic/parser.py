"""Recursive-descent parser for the formula syntax.

Grammar, loosest to tightest::

    impl  := or ("->" impl)?
    or    := and ("|" and)*
    and   := unary ("&" unary)*
    unary := "!" unary | "<>[" budget "]" unary | "B{" tag "}" unary | atom | "(" impl ")"

Budgets are nonnegative rationals written ``5``, ``2.5`` or ``1/3``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .formula import And, Atom, Believes, Formula, Implies, Not, Or, Possibly


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, text: str, offset: int):
        self.offset = len(text[:offset].encode("utf-8"))
        self.text = text
        super().__init__(f"{message} at byte {self.offset}")


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_TAG = re.compile(r"[A-Za-z0-9_*]+")
_BUDGET = re.compile(r"\s*([-−]?)\s*(\d+(?:\.\d+)?(?:/\d+)?)\s*")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str, pos: int | None = None):
        raise FormulaSyntaxError(message, self.text, self.pos if pos is None else pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, token: str) -> bool:
        self.skip()
        return self.text.startswith(token, self.pos)

    def expect(self, token: str):
        if not self.peek(token):
            self.error(f"expected {token!r}")
        self.pos += len(token)

    def parse(self) -> Formula:
        f = self.implication()
        self.skip()
        if self.pos != len(self.text):
            self.error(f"unexpected {self.text[self.pos]!r}")
        return f

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek("->"):
            self.pos += 2
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek("|"):
            self.pos += 1
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.peek("&"):
            self.pos += 1
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        self.skip()
        if self.peek("!"):
            self.pos += 1
            return Not(self.unary())
        if self.peek("<>["):
            self.pos += 3
            budget = self.budget()
            self.expect("]")
            return Possibly(budget, self.unary())
        if self.peek("B{"):
            self.pos += 2
            m = _TAG.match(self.text, self.pos)
            if not m:
                self.error("expected a reasoner tag")
            self.pos = m.end()
            self.expect("}")
            return Believes(m.group(), self.unary())
        if self.peek("("):
            self.pos += 1
            f = self.implication()
            self.expect(")")
            return f
        m = _IDENT.match(self.text, self.pos)
        if not m:
            if self.pos >= len(self.text):
                self.error("unexpected end of input")
            self.error(f"unexpected {self.text[self.pos]!r}")
        self.pos = m.end()
        return Atom(m.group())

    def budget(self) -> Fraction:
        start = self.pos
        m = _BUDGET.match(self.text, self.pos)
        if not m:
            self.error("expected a budget")
        if m.group(1):
            self.error("budget must be nonnegative", start)
        self.pos = m.end()
        try:
            return Fraction(m.group(2))
        except ZeroDivisionError:
            self.error("budget has a zero denominator", start)


def parse_formula(text: str) -> Formula:
    return _Parser(text).parse()
