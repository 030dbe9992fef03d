"""Cross-check by explicit prolongation.

Given a new input u1bar = g(x, u), keep one original input as u2bar, solve
u1bar = w0 for the other, add the chain w0' = w1, ..., w(d-1)' = v and ask
whether the prolonged system is static feedback linearizable.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy as sp

from ..decision import Assumption, DecisionTrace, ModelError, SystemModel, static_feedback_linearizable
from ..liealg import VectorField, tidy
from ..symexpr import (
    ExprError, Expr, Symbol, add, differentiate, div, mul, substitute, sub, to_text,
)
from ..symexpr.sympy_bridge import from_sympy, sympy_symbol, to_sympy


class OracleError(ExprError):
    pass


@dataclass
class OracleResult:
    ubar1: Expr
    ubar2: Expr
    eliminated: Expr  # the original input expressed through w0
    solution: Expr
    model: SystemModel
    trace: DecisionTrace

    @property
    def sfl(self) -> bool:
        return self.trace.accepted

    def to_json(self) -> dict:
        return {
            "ubar1": to_text(self.ubar1),
            "ubar2": to_text(self.ubar2),
            "solved": f"{self.eliminated.name} = {to_text(self.solution)}",
            "states": [s.name for s in self.model.states],
            "inputs": [u.name for u in self.model.inputs],
            "dynamics": [to_text(e) for e in self.model.dynamics],
            "static_feedback_linearizable": self.sfl,
            "path": list(self.trace.path),
        }


def _fresh(base: str, taken: set) -> str:
    name = base
    while name in taken:
        name += "_"
    taken.add(name)
    return name


def _solve_for(sys, g: Expr, u: Expr, w0: Expr) -> list:
    """Candidate expressions for u solving g = w0, linear case first."""
    frame = sys.frame
    dg = tidy(differentiate(g, u))
    if frame.is_zero(tidy(differentiate(dg, u))):
        rest = tidy(substitute(g, {u: 0}))
        return [tidy(div(sub(w0, rest), dg))]
    table = list(frame.domain.columns) + [w0]
    try:
        sols = sp.solve(sp.Eq(to_sympy(g), sympy_symbol(w0)), sympy_symbol(u))
    except (NotImplementedError, ValueError):
        return []
    out = []
    for s in sols:
        try:
            out.append(tidy(from_sympy(s, table)))
        except ExprError:
            continue
    return out


def prolongation_oracle(sys: SystemModel, ubar1: Expr, d: int) -> OracleResult:
    if d < 1:
        raise OracleError("prolongation order must be at least 1")
    frame = sys.frame
    unknown = ubar1.free_symbols - set(frame.domain.columns)
    if unknown:
        raise OracleError(f"unknown symbols in the new input: {sorted(s.name for s in unknown)}")
    partials = [tidy(differentiate(ubar1, u)) for u in sys.inputs]
    vals, _ = frame.evaluate(partials)
    score = [float(np.nanmedian(np.abs(vals[:, i]))) if not frame.is_zero(partials[i]) else -1.0
             for i in range(2)]
    if max(score) < 0:
        raise OracleError("the new input does not depend on the original inputs")
    solve_idx = int(np.argmax(score))
    keep = sys.inputs[1 - solve_idx]
    target = sys.inputs[solve_idx]
    taken = {s.name for s in frame.domain.columns}
    ws = [Symbol(_fresh(f"w{k}", taken)) for k in range(d)]
    v = Symbol(_fresh("v", taken))
    for sol in _solve_for(sys, ubar1, target, ws[0]):
        dyn = [tidy(substitute(e, {target: sol})) for e in sys.dynamics]
        dyn += ws[1:] + [v]
        assumptions = [Assumption(tidy(substitute(a.expr, {target: sol})), a.relation)
                       for a in sys.assumptions]
        try:
            model = SystemModel(f"{sys.name}+prolonged", list(sys.states) + ws, [v, keep], dyn,
                                sys.constants, assumptions, sys.seed, sys.samples, sys.tau)
        except (ModelError, ExprError):
            continue
        back = tidy(sub(substitute(ubar1, {target: sol}), ws[0]))
        try:
            if not model.frame.is_zero(back):
                continue
        except ExprError:
            continue
        return OracleResult(ubar1, keep, target, sol, model, static_feedback_linearizable(model))
    raise OracleError(f"could not solve {to_text(ubar1)} = {ws[0].name} for {target.name}")


def derive_ubar1(sys: SystemModel, vc: VectorField) -> Expr | None:
    """A function of the inputs annihilated by v_c, from a short menu."""
    frame = sys.frame
    u1, u2 = sys.inputs
    if any(not frame.is_zero(vc.coeffs[frame.index(x)]) for x in sys.states):
        return None  # only input directions have such a function
    a1, a2 = (vc.coeffs[frame.index(u)] for u in sys.inputs)
    menu = [u1, u2, div(u1, u2), div(u2, u1), add(u1, u2), sub(u1, u2), mul(u1, u2)]
    if not frame.is_zero(a2):
        r = tidy(div(a1, a2))
        if all(frame.is_zero(tidy(differentiate(r, u))) for u in sys.inputs):
            menu.append(tidy(sub(u1, mul(r, u2))))
    for g in menu:
        if frame.is_zero(tidy(vc.apply(g))) and not all(
                frame.is_zero(tidy(differentiate(g, u))) for u in sys.inputs):
            return g
    return None


__all__ = ["OracleError", "OracleResult", "derive_ubar1", "prolongation_oracle"]
