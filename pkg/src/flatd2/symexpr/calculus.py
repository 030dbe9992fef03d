"""Structural differentiation."""
from __future__ import annotations

from fractions import Fraction

from .expr import (
    ADD, CONST, FUNC, MUL, POW, SYM, ONE, ZERO, Expr, ExprError, _make,
    add, cos, mul, postorder, pow_, sin, sqrt, tan,
)


def _check_var(v: Expr):
    if not isinstance(v, Expr) or v.kind != SYM:
        raise ExprError(f"cannot differentiate with respect to {v!r}")


def differentiate(e: Expr, v: Expr, declared=None) -> Expr:
    """d e / d v.

    ``declared`` optionally lists the symbols of the enclosing model; an
    undeclared ``v`` is rejected.
    """
    _check_var(v)
    if declared is not None and v not in declared:
        raise ExprError(f"{v.name!r} is not a declared variable")
    if v not in e.free_symbols:
        return ZERO
    for n in postorder([e]):
        if n._dcache is not None and v in n._dcache:
            continue
        if n._dcache is None:
            n._dcache = {}
        n._dcache[v] = _diff_node(n, v)
    return e._dcache[v]


def _d(n: Expr, v: Expr) -> Expr:
    if v not in n.free_symbols:
        return ZERO
    return n._dcache[v]


def _diff_node(n: Expr, v: Expr) -> Expr:
    k = n.kind
    if v not in n.free_symbols:
        return ZERO
    if k == SYM:
        return ONE if n is v else ZERO
    if k == ADD:
        return add(*(_d(a, v) for a in n.args))
    if k == MUL:
        fs = n.args
        terms = []
        for i, f in enumerate(fs):
            df = _d(f, v)
            if df.is_zero_const:
                continue
            others = fs[:i] + fs[i + 1:]
            terms.append(mul(_make(CONST, n.payload), df, *others))
        return add(*terms)
    if k == POW:
        b = n.args[0]
        e = n.payload
        return mul(e, pow_(b, e - 1), _d(b, v))
    if k == FUNC:
        a = n.args[0]
        da = _d(a, v)
        name = n.payload
        if name == "sin":
            inner = cos(a)
        elif name == "cos":
            inner = mul(-1, sin(a))
        elif name == "tan":
            inner = add(1, pow_(tan(a), 2))
        elif name == "arcsin":
            inner = pow_(sqrt(add(1, mul(-1, pow_(a, 2)))), -1)
        elif name == "sqrt":
            inner = mul(Fraction(1, 2), pow_(n, -1))
        elif name == "exp":
            inner = n
        elif name == "log":
            inner = pow_(a, -1)
        else:  # pragma: no cover - guarded by func()
            raise ExprError(name)
        return mul(inner, da)
    return ZERO


def gradient(e: Expr, coords) -> tuple:
    return tuple(differentiate(e, z) for z in coords)
