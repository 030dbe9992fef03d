"""Finding functions whose differentials lie in a codistribution.

Antiderivatives go through SymPy; every result is checked back in the
native kernel by sampling, so a wrong antiderivative is simply dropped.
"""
from __future__ import annotations

import sympy as sp

from ..liealg import Codistribution, OneForm, differential, tidy
from ..symexpr import Expr, ExprError, count_ops, div
from ..symexpr.sympy_bridge import from_sympy, to_sympy

_SIMPLIFY_LIMIT = 400
_INVERTIBLE = (sp.sin, sp.asin, sp.tan, sp.exp, sp.log)


def _clean(x):
    if sp.count_ops(x) > _SIMPLIFY_LIMIT:
        return sp.cancel(x)
    return sp.simplify(x)


def potential(comps: dict, order) -> "sp.Expr | None":
    """Successive antiderivatives of sum comps[z] dz; None when SymPy gives up.

    Closedness is not checked here.
    """
    phi = sp.Integer(0)
    for z in order:
        r = _clean(comps.get(z, 0) - sp.diff(phi, z))
        if r == 0:
            continue
        try:
            part = sp.integrate(r, z)
        except (NotImplementedError, ValueError, TypeError):
            return None
        if part.has(sp.Integral):
            return None
        phi = phi + part
    return _clean(phi)


def _back(frame, x) -> Expr | None:
    try:
        return tidy(from_sympy(x, frame.domain.columns))
    except ExprError:
        return None


def _is_potential(frame, h: Expr, form: OneForm) -> bool:
    dh = differential(frame, h)
    try:
        return all(frame.is_zero(tidy(a - b)) for a, b in zip(dh.coeffs, form.coeffs))
    except ExprError:
        return False


def integrate_one_form(form: OneForm, sys=None, multipliers: bool = True) -> Expr | None:
    """h with dh = mu * form for mu in {1, 1/w_i}, or None."""
    frame = form.frame
    syms = [to_sympy(z) for z in frame.coords]
    mus = [None]
    if multipliers:
        nz = [c for c in form.coeffs if not c.is_zero_const]
        mus += [c for c in nz]
    seen = set()
    for mu in mus:
        cand = form if mu is None else form.scaled(div(1, mu))
        key = tuple(cand.coeffs)
        if key in seen:
            continue
        seen.add(key)
        try:
            if not cand.is_closed():
                continue
        except ExprError:
            continue
        comps = {s: to_sympy(c) for s, c in zip(syms, cand.coeffs) if not c.is_zero_const}
        order = [s for s in syms if s in comps]
        x = potential(comps, order)
        if x is None:
            continue
        h = _back(frame, x)
        if h is not None and _is_potential(frame, h, cand):
            return h
    return None


def _cleared(frame, form: OneForm) -> OneForm:
    """form times the common denominator of its coefficients."""
    parts = [sp.fraction(sp.together(to_sympy(c))) for c in form.coeffs]
    dens = [d for _, d in parts if d != 1]
    if not dens:
        return form
    lcm = sp.lcm(dens) if len(dens) > 1 else dens[0]
    try:
        coeffs = [from_sympy(sp.cancel(num * lcm / den), frame.domain.columns) for num, den in parts]
    except ExprError:
        return form
    return OneForm(frame, [tidy(c) for c in coeffs])


def _strip(x):
    """An equivalent function with the same level sets, written more simply."""
    while True:
        if isinstance(x, _INVERTIBLE):
            x = x.args[0]
        elif x.is_Pow and x.exp.is_Number and x.exp not in (0,):
            x = x.base
        elif x.is_Mul:
            const = [a for a in x.args if a.is_Number]
            if not const:
                return x
            x = sp.Mul(*[a for a in x.args if not a.is_Number])
        elif x.is_Add:
            const = [a for a in x.args if a.is_Number]
            if not const:
                return x
            x = sp.Add(*[a for a in x.args if not a.is_Number])
        else:
            return x


def _corrected(frame, form: OneForm, h) -> Expr | None:
    """Potential of form + c*dh for some c, found in coordinates containing h."""
    syms = [to_sympy(z) for z in frame.coords]
    w = [to_sympy(c) for c in form.coeffs]
    if h in syms:
        k = syms.index(h)
        ys, wn, back = syms, w, {}
    else:
        H = sp.Symbol("_H", real=True)
        k = None
        for i, z in enumerate(syms):
            if not h.has(z):
                continue
            try:
                sols = sp.solve(sp.Eq(h, H), z)
            except (NotImplementedError, ValueError):
                continue
            if len(sols) == 1:
                k, g = i, sols[0]
                break
        if k is None:
            return None
        ys = syms[:k] + [H] + syms[k + 1:]
        zk = syms[k]
        wn = []
        for j, y in enumerate(ys):
            base = w[j] if j != k else 0
            wn.append(_clean((base + w[k] * sp.diff(g, y)).subs(zk, g)))
        back = {H: h}
    yk = ys[k]
    grad = {y: _clean(sp.diff(wn[i], yk) - sp.diff(wn[k], y)) for i, y in enumerate(ys) if i != k}
    c = potential(grad, [y for y in ys if y != yk])
    if c is None:
        return None
    comps = {y: wn[i] for i, y in enumerate(ys)}
    comps[yk] = comps[yk] + c
    x = potential(comps, ys)
    if x is None:
        return None
    if back:
        x = _clean(x.subs(back))
    return _back(frame, x)


def find_functions(sys, P: Codistribution, need: int, known: list) -> list:
    """Up to ``need`` functions with differentials in P, independent of ``known``.

    Tries coordinates, closed generators, generators corrected by a multiple
    of the differential of a coordinate or known function, and last simple
    integrating factors.
    """
    frame = sys.frame
    found: list = []
    diffs = [differential(frame, k) for k in known]

    def accept(h) -> bool:
        if h is None or len(found) >= need:
            return False
        dh = differential(frame, h)
        if dh.is_structurally_zero or not P.contains(dh):
            return False
        cur = diffs + [differential(frame, g) for g in found]
        if cur and Codistribution(frame, cur + [dh]).rank <= Codistribution(frame, cur).rank:
            return False
        found.append(h)
        return True

    for z in frame.coords:
        accept(z)
    if len(found) >= need:
        return found
    forms = []
    for w in P.reduced().basis:
        for v in (_cleared(frame, w), w):
            if v not in forms:
                forms.append(v)
    for form in forms:
        if len(found) >= need:
            return found
        accept(integrate_one_form(form, multipliers=False))
    helpers = []
    for z in frame.coords:
        if P.contains(frame.coordinate_form(z)):
            helpers.append(to_sympy(z))
    for g in list(known) + found:
        s = _strip(to_sympy(g))
        if s not in helpers:
            helpers.append(s)
    for form in forms:
        for h in helpers:
            if len(found) >= need:
                return found
            try:
                cand = _corrected(frame, form, h)
            except (ExprError, ValueError, TypeError, NotImplementedError):
                cand = None
            if cand is not None and count_ops(cand) < 500:
                accept(cand)
    for form in forms:
        if len(found) >= need:
            return found
        accept(integrate_one_form(form))
    return found
