"""Immutable, hash-consed expression trees.

Every node is interned, so structural equality is object identity and
``a is b`` is a valid equality test.  Constructors canonicalize on the fly:
sums collect like terms, products collect powers of equal bases, rational
constants are folded exactly.  Quotients and negations are not stored as
separate node kinds; ``a / b`` becomes ``a * b^-1`` and ``-a`` becomes
``(-1) * a``.
"""
from __future__ import annotations

import sys
import weakref
import zlib
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

CONST, SYM, ADD, MUL, POW, FUNC = range(6)
FUNCTIONS = ("sin", "cos", "tan", "arcsin", "sqrt", "exp", "log")


class ExprError(ValueError):
    pass


class Expr:
    __slots__ = (
        "kind", "payload", "args", "key", "_free", "_dcache", "_size", "__weakref__",
    )

    def __hash__(self):
        return self.key

    # identity equality is inherited from object; nodes are interned

    def __repr__(self):
        from .printing import to_text

        return f"Expr({to_text(self)!r})"

    def __str__(self):
        from .printing import to_text

        return to_text(self)

    def __reduce__(self):
        from .printing import to_text

        raise TypeError(f"Expr {to_text(self)!r} is interned; pickle its text instead")

    # arithmetic sugar
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise ExprError("only integer exponents are supported; use sqrt() for roots")
        return pow_(self, n)

    def __neg__(self):
        return neg(self)

    @property
    def is_zero_const(self) -> bool:
        return self.kind == CONST and self.payload == 0

    @property
    def free_symbols(self) -> frozenset:
        fs = self._free
        if fs is None:
            fs = _free_symbols(self)
        return fs

    @property
    def size(self) -> int:
        """Tree size (shared subtrees counted once per occurrence)."""
        s = self._size
        if s is None:
            s = 1 + sum(a.size for a in self.args)
            self._size = s
        return s

    @property
    def name(self) -> str:
        if self.kind != SYM:
            raise ExprError("not a symbol")
        return self.payload[0]

    @property
    def is_constant_symbol(self) -> bool:
        return self.kind == SYM and self.payload[1]


_table: "weakref.WeakValueDictionary[tuple, Expr]" = weakref.WeakValueDictionary()


def _payload_key(kind, payload):
    if kind == CONST:
        return (payload.numerator, payload.denominator)
    if kind == SYM:
        return (zlib.crc32(payload[0].encode()), int(payload[1]))
    if kind == FUNC:
        return zlib.crc32(payload.encode())
    if kind == MUL:
        return (payload.numerator, payload.denominator)
    return payload


def _make(kind, payload, args=()) -> Expr:
    k = (kind, payload, args)
    node = _table.get(k)
    if node is not None:
        return node
    node = object.__new__(Expr)
    node.kind = kind
    node.payload = payload
    node.args = args
    # deterministic across interpreter runs (no str hashing involved)
    node.key = hash((kind, _payload_key(kind, payload), tuple(a.key for a in args)))
    node._free = None
    node._dcache = None
    node._size = None
    _table[k] = node
    return node


def _free_symbols(e: Expr) -> frozenset:
    stack = [e]
    order = []
    while stack:
        n = stack.pop()
        if n._free is not None:
            continue
        order.append(n)
        stack.extend(a for a in n.args if a._free is None)
    for n in reversed(order):
        if n._free is not None:
            continue
        if n.kind == SYM:
            n._free = frozenset((n,))
        elif n.kind == CONST:
            n._free = frozenset()
        else:
            acc = frozenset()
            for a in n.args:
                if a._free is None:
                    _free_symbols(a)
                acc = acc | a._free
            n._free = acc
    return e._free


# ---------------------------------------------------------------- leaves

def Const(value) -> Expr:
    if isinstance(value, Expr):
        if value.kind != CONST:
            raise ExprError("not a constant expression")
        return value
    if isinstance(value, bool):
        value = int(value)
    if isinstance(value, float):
        raise ExprError("floating-point literals are not allowed; pass a Fraction or str")
    if isinstance(value, (int, Rational, str)):
        return _make(CONST, Fraction(value))
    raise ExprError(f"cannot make a constant from {value!r}")


def Symbol(name: str, constant: bool = False) -> Expr:
    if not name or not (name[0].isalpha() or name[0] == "_"):
        raise ExprError(f"invalid symbol name {name!r}")
    return _make(SYM, (name, bool(constant)))


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    return Const(x)


ZERO = Const(0)
ONE = Const(1)
MINUS_ONE = Const(-1)
HALF = Const(Fraction(1, 2))


# ---------------------------------------------------------------- sums

def _split_coeff(t: Expr):
    if t.kind == MUL:
        c = t.payload
        if c == 1:
            return c, t
        if len(t.args) == 1:
            return c, t.args[0]
        return c, _make(MUL, Fraction(1), t.args)
    return Fraction(1), t


def _with_coeff(c: Fraction, rest: Expr) -> Expr:
    if c == 1:
        return rest
    if rest.kind == MUL:
        return _make(MUL, c, rest.args)
    return _make(MUL, c, (rest,))


def add(*xs) -> Expr:
    coeffs: dict = {}
    const = Fraction(0)
    stack = list(xs)
    while stack:
        t = as_expr(stack.pop())
        k = t.kind
        if k == ADD:
            stack.extend(t.args)
        elif k == CONST:
            const += t.payload
        else:
            c, rest = _split_coeff(t)
            prev = coeffs.get(rest)
            coeffs[rest] = c if prev is None else prev + c
    terms = [_with_coeff(c, r) for r, c in coeffs.items() if c != 0]
    if const != 0:
        terms.append(_make(CONST, const))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    terms.sort(key=_sort_key)
    return _make(ADD, None, tuple(terms))


def _sort_key(e: Expr) -> int:
    return e.key


def neg(x) -> Expr:
    return mul(MINUS_ONE, x)


def sub(a, b) -> Expr:
    return add(a, neg(as_expr(b)))


# ---------------------------------------------------------------- products

def mul(*xs) -> Expr:
    coef = Fraction(1)
    powers: dict = {}

    def acc(base: Expr, e: int):
        nonlocal coef
        k = base.kind
        if k == CONST:
            coef *= base.payload ** e
        elif k == MUL:
            coef *= base.payload ** e
            for f in base.args:
                if f.kind == POW:
                    acc(f.args[0], f.payload * e)
                else:
                    acc(f, e)
        elif k == POW:
            acc(base.args[0], base.payload * e)
        else:
            powers[base] = powers.get(base, 0) + e

    for x in xs:
        x = as_expr(x)
        if x.kind == CONST:
            if x.payload == 0:
                return ZERO
            coef *= x.payload
        else:
            try:
                acc(x, 1)
            except ZeroDivisionError:
                raise ExprError("division by zero constant") from None
    if coef == 0:
        return ZERO
    # sqrt(a)^k with |k| >= 2 folds into integer powers of a
    changed = True
    while changed:
        changed = False
        for base in list(powers):
            e = powers[base]
            if base.kind == FUNC and base.payload == "sqrt" and (e >= 2 or e <= -2):
                q, r = divmod(e, 2)
                powers[base] = r
                acc(base.args[0], q)
                changed = True
    factors = []
    for base, e in powers.items():
        if e == 0:
            continue
        factors.append(base if e == 1 else _make(POW, e, (base,)))
    if not factors:
        return _make(CONST, coef)
    if coef == 1 and len(factors) == 1:
        return factors[0]
    factors.sort(key=_sort_key)
    return _make(MUL, coef, tuple(factors))


def pow_(base, n: int) -> Expr:
    base = as_expr(base)
    if not isinstance(n, int):
        raise ExprError("only integer exponents are supported")
    if n == 0:
        return ONE
    if n == 1:
        return base
    k = base.kind
    if k == CONST:
        if base.payload == 0 and n < 0:
            raise ExprError("division by zero constant")
        return _make(CONST, base.payload ** n)
    if k in (MUL, POW) or (k == FUNC and base.payload == "sqrt" and abs(n) >= 2):
        if k == MUL:
            return mul(*([_make(CONST, base.payload ** n)] if base.payload != 1 else []),
                       *(pow_(f, n) for f in base.args))
        return mul(_make(POW, n, (base,)) if k == FUNC else pow_(base.args[0], base.payload * n))
    return _make(POW, n, (base,))


def div(a, b) -> Expr:
    return mul(a, pow_(as_expr(b), -1))


# ---------------------------------------------------------------- functions

def _exact_sqrt(q: Fraction):
    if q < 0:
        raise ExprError("sqrt of a negative constant")
    from math import isqrt

    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def func(name: str, arg) -> Expr:
    if name not in FUNCTIONS:
        raise ExprError(f"unknown function {name!r}; allowed: {', '.join(FUNCTIONS)}")
    arg = as_expr(arg)
    if arg.kind == CONST:
        v = arg.payload
        if v == 0 and name in ("sin", "tan", "arcsin", "sqrt"):
            return ZERO
        if v == 0 and name in ("cos", "exp"):
            return ONE
        if v == 1 and name == "log":
            return ZERO
        if name == "log" and v <= 0:
            raise ExprError("log of a non-positive constant")
        if name == "arcsin" and abs(v) > 1:
            raise ExprError("arcsin of a constant outside [-1, 1]")
        if name == "sqrt":
            r = _exact_sqrt(v)
            if r is not None:
                return _make(CONST, r)
    return _make(FUNC, name, (arg,))


def sin(a):
    return func("sin", a)


def cos(a):
    return func("cos", a)


def tan(a):
    return func("tan", a)


def arcsin(a):
    return func("arcsin", a)


def sqrt(a):
    return func("sqrt", a)


def exp(a):
    return func("exp", a)


def log(a):
    return func("log", a)


# ---------------------------------------------------------------- traversal

def rebuild(e: Expr, args: tuple) -> Expr:
    """Re-apply the canonicalizing constructor of ``e``'s kind to new children."""
    k = e.kind
    if k == ADD:
        return add(*args)
    if k == MUL:
        return mul(_make(CONST, e.payload), *args)
    if k == POW:
        return pow_(args[0], e.payload)
    if k == FUNC:
        return func(e.payload, args[0])
    return e


def postorder(roots: Iterable[Expr]) -> list:
    """Unique nodes reachable from ``roots``, children before parents."""
    seen = set()
    out = []
    for r in roots:
        if id(r) in seen:
            continue
        stack = [(r, False)]
        while stack:
            n, done = stack.pop()
            if done:
                out.append(n)
                continue
            if id(n) in seen:
                continue
            seen.add(id(n))
            stack.append((n, True))
            for a in reversed(n.args):
                if id(a) not in seen:
                    stack.append((a, False))
    return out


def substitute(e: Expr, bindings: Mapping) -> Expr:
    """Simultaneous substitution; keys are symbols or symbol names."""
    if not bindings:
        return e
    table = {}
    for k, v in bindings.items():
        if isinstance(k, str):
            sym = next((s for s in e.free_symbols if s.payload[0] == k), None)
            if sym is None:
                continue
            k = sym
        table[k] = as_expr(v)
    if not table:
        return e
    keys = frozenset(table)
    memo: dict = {}
    for n in postorder([e]):
        if n.kind == SYM:
            memo[n] = table.get(n, n)
        elif not (n.free_symbols & keys):
            memo[n] = n
        elif n.args:
            memo[n] = rebuild(n, tuple(memo[a] for a in n.args))
        else:
            memo[n] = n
    return memo[e]


def count_ops(e: Expr) -> int:
    """Number of distinct nodes in the DAG."""
    return len(postorder([e]))
