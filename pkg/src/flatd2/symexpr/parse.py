"""Recursive-descent parser for infix expression text.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Exponents must reduce to integer constants.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Mapping

from .expr import CONST, FUNCTIONS, Const, Expr, ExprError, add, div, func, mul, neg, pow_, sub

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))")


class ParseError(ExprError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.message = message


class _Parser:
    def __init__(self, text: str, symbols: Mapping[str, Expr], line: int, col0: int):
        self.text = text
        self.symbols = symbols
        self.line = line
        self.col0 = col0
        self.tokens = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                self.fail(f"unexpected character {text[pos]!r}", pos)
            kind = m.lastgroup
            start = m.start(kind)
            self.tokens.append((kind, m.group(kind), start))
            pos = m.end()
        self.i = 0

    def fail(self, message, pos=None):
        if pos is None:
            pos = self.tokens[self.i][2] if self.i < len(self.tokens) else len(self.text.rstrip())
        raise ParseError(message, self.line, self.col0 + pos + 1)

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, None)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None:
            self.fail("unexpected end of expression")
        if value is not None and tok[1] != value:
            self.fail(f"expected {value!r}, found {tok[1]!r}")
        self.i += 1
        return tok

    def parse(self) -> Expr:
        if not self.tokens:
            self.fail("empty expression", 0)
        e = self.expr()
        if self.i != len(self.tokens):
            self.fail(f"unexpected token {self.peek()[1]!r}")
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            if op == "*":
                e = mul(e, rhs)
            else:
                if rhs.kind == CONST and rhs.payload == 0:
                    self.fail("division by zero")
                e = div(e, rhs)
        return e

    def unary(self):
        tok = self.peek()
        if tok[1] == "-":
            self.take()
            return neg(self.unary())
        if tok[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            tok = self.take()
            ex = self.unary()
            if ex.kind != CONST or ex.payload.denominator != 1:
                self.fail("exponent must be an integer constant (use sqrt for roots)", tok[2])
            try:
                return pow_(base, int(ex.payload))
            except ExprError as err:
                self.fail(str(err), tok[2])
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Const(Fraction(val))
        if kind == "name":
            if self.peek()[1] == "(":
                if val not in FUNCTIONS:
                    self.fail(f"unknown function {val!r}", pos)
                self.take("(")
                arg = self.expr()
                self.take(")")
                try:
                    return func(val, arg)
                except ExprError as err:
                    self.fail(str(err), pos)
            sym = self.symbols.get(val)
            if sym is None:
                self.fail(f"unknown symbol {val!r}", pos)
            return sym
        if val == "(":
            e = self.expr()
            self.take(")")
            return e
        self.fail(f"unexpected token {val!r}", pos)


def parse_expr(text: str, symbols: Mapping[str, Expr], line: int = 1, column: int = 1) -> Expr:
    return _Parser(text, symbols, line, column - 1).parse()
