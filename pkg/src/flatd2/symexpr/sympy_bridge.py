"""Conversion to and from SymPy.

SymPy is used only where a real CAS pays off: antiderivatives, factoring a
discriminant, and solving for an input.  Everything else stays in the
native kernel.
"""
from __future__ import annotations

from fractions import Fraction

import sympy as sp

from .expr import ADD, CONST, MUL, POW, SYM, Const, Expr, ExprError, Symbol, add, func, mul, postorder, pow_

_TO_SP = {
    "sin": sp.sin, "cos": sp.cos, "tan": sp.tan, "arcsin": sp.asin,
    "sqrt": sp.sqrt, "exp": sp.exp, "log": sp.log,
}
_FROM_SP = {sp.sin: "sin", sp.cos: "cos", sp.tan: "tan", sp.asin: "arcsin", sp.exp: "exp", sp.log: "log"}


def sympy_symbol(s: Expr) -> sp.Symbol:
    return sp.Symbol(s.name, real=True)


def to_sympy(e: Expr):
    memo = {}
    for n in postorder([e]):
        k = n.kind
        if k == CONST:
            q = n.payload
            r = sp.Rational(q.numerator, q.denominator)
        elif k == SYM:
            r = sympy_symbol(n)
        elif k == ADD:
            r = sp.Add(*(memo[a] for a in n.args))
        elif k == MUL:
            q = n.payload
            r = sp.Mul(sp.Rational(q.numerator, q.denominator), *(memo[a] for a in n.args))
        elif k == POW:
            r = sp.Pow(memo[n.args[0]], n.payload)
        else:
            r = _TO_SP[n.payload](memo[n.args[0]])
        memo[n] = r
    return memo[e]


def from_sympy(x, symbols) -> Expr:
    """Convert back; ``symbols`` maps names to kernel symbols.

    Raises :class:`ExprError` for constructs outside the kernel language
    (non-integer powers other than square roots, unknown functions, floats).
    """
    table = {s.name: s for s in symbols}

    def conv(t):
        if t.is_Symbol:
            if t.name not in table:
                raise ExprError(f"unknown symbol {t.name!r} in SymPy result")
            return table[t.name]
        if t.is_Rational:
            return Const(Fraction(int(t.p), int(t.q)))
        if t.is_Number:
            raise ExprError(f"non-rational number {t} in SymPy result")
        if t.is_Add:
            return add(*(conv(a) for a in t.args))
        if t.is_Mul:
            return mul(*(conv(a) for a in t.args))
        if t.is_Pow:
            b, ex = t.args
            if ex.is_Integer:
                return pow_(conv(b), int(ex))
            if ex.is_Rational and ex.q == 2:
                return pow_(func("sqrt", conv(b)), int(ex.p))
            raise ExprError(f"unsupported power {t}")
        if t.func in _FROM_SP:
            return func(_FROM_SP[t.func], conv(t.args[0]))
        if t == sp.pi:
            raise ExprError("pi is not representable exactly")
        raise ExprError(f"unsupported SymPy construct {t.func.__name__}")

    return conv(sp.sympify(x))


__all__ = ["to_sympy", "from_sympy", "sympy_symbol", "Symbol"]
