"""Infix rendering compatible with the model-file expression grammar."""
from __future__ import annotations

from fractions import Fraction

from .expr import CONST, FUNC, MUL, POW, SYM, Expr

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def to_text(e: Expr) -> str:
    memo: dict = {}
    return _render(e, memo)[0]


def _frac(q: Fraction) -> tuple:
    if q.denominator == 1:
        s = str(q.numerator)
        return s, (_PREC_ATOM if q >= 0 else _PREC_UNARY)
    return f"{q.numerator}/{q.denominator}", _PREC_MUL


def _render(e: Expr, memo) -> tuple:
    hit = memo.get(e)
    if hit is not None:
        return hit
    k = e.kind
    if k == CONST:
        out = _frac(e.payload)
    elif k == SYM:
        out = (e.payload[0], _PREC_ATOM)
    elif k == FUNC:
        out = (f"{e.payload}({_render(e.args[0], memo)[0]})", _PREC_ATOM)
    elif k == POW:
        out = _render_product(Fraction(1), (e,), memo)
    elif k == MUL:
        out = _render_product(e.payload, e.args, memo)
    else:
        out = _render_sum(e, memo)
    memo[e] = out
    return out


def _wrap(text_prec, min_prec):
    text, prec = text_prec
    return f"({text})" if prec < min_prec else text


def _render_sum(e: Expr, memo) -> tuple:
    parts = []
    for t in e.args:
        text, _ = _render(t, memo)
        parts.append(text)
    # positive terms first, then alphabetical, so output is stable and readable
    parts.sort(key=lambda s: (s.startswith("-"), s.lstrip("-")))
    out = parts[0]
    for p in parts[1:]:
        out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
    return out, _PREC_ADD


def _factor_text(base: Expr, n: int, memo) -> str:
    if n == 1:
        return _wrap(_render(base, memo), _PREC_MUL + 1)
    return f"{_wrap(_render(base, memo), _PREC_ATOM)}^{n}"


def _render_product(coef: Fraction, factors, memo) -> tuple:
    num, den = [], []
    for f in factors:
        if f.kind == POW:
            base, n = f.args[0], f.payload
        else:
            base, n = f, 1
        (num if n > 0 else den).append((base, abs(n)))
    sign = "-" if coef < 0 else ""
    c = abs(coef)
    num_txt = [_factor_text(b, n, memo) for b, n in num]
    num_txt.sort()
    den_txt = [_factor_text(b, n, memo) for b, n in den]
    den_txt.sort()
    if c.numerator != 1 or not num_txt:
        num_txt.insert(0, str(c.numerator))
    if c.denominator != 1:
        den_txt.insert(0, str(c.denominator))
    text = "*".join(num_txt)
    if den_txt:
        d = den_txt[0] if len(den_txt) == 1 else "(" + "*".join(den_txt) + ")"
        text = f"{text}/{d}"
    if sign:
        return sign + text, _PREC_UNARY
    return text, (_PREC_MUL if (len(num_txt) > 1 or den_txt) else _PREC_POW)
