"""Directions v_c = a1*v1 + a2*v2 with [v_c, [v_c, f]] inside D_k1.

The membership condition is a quadratic form in (a1, a2) whose vector
coefficients A = [v1,[v1,f]], B = [v1,[v2,f]], C = [v2,[v2,f]] are reduced
modulo D_k1 through its annihilator.  The rank of the three residual
vectors decides which closed-form case applies; every candidate is then
checked by the probabilistic zero test before it is returned.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import sympy as sp

from ..liealg import Distribution, VectorField, annihilator, lie_bracket, tidy
from ..liealg.linalg import determinant, generic_rank_of, greedy_independent
from ..symexpr import ONE, ZERO, Const, Expr, ExprError, add, div, mul, neg, sqrt, to_text
from ..symexpr.sympy_bridge import from_sympy, to_sympy


MINUS_TWO = Const(-2)


@dataclass
class AlgWithinSolution:
    alpha: tuple  # (a1, a2) as Exprs
    normalization: str  # "a2=1" or "(1,0)"
    vc: VectorField
    case: str = ""

    def text(self) -> tuple:
        return tuple(to_text(a) for a in self.alpha)


@dataclass
class AlgWithinReport:
    solutions: list = field(default_factory=list)
    residual_rank: Optional[int] = None
    case: str = ""
    rejected: list = field(default_factory=list)  # (alpha text, reason)

    def to_json(self) -> dict:
        return {
            "case": self.case,
            "residual_rank": self.residual_rank,
            "solutions": [list(s.text()) for s in self.solutions],
            "rejected": [{"alpha": list(a), "reason": r} for a, r in self.rejected],
        }


def _combination(frame, vecs, nums, target: int, basis: list) -> list:
    """Coefficients c with vecs[target] = sum c_i vecs[basis_i] (Cramer on pivot rows)."""
    V, E = nums
    m = len(vecs[0])
    mv = np.transpose(V[:, basis, :], (0, 2, 1))
    me = np.transpose(E[:, basis, :], (0, 2, 1))
    rows = greedy_independent(mv, me, frame.tau, range(m))
    B = [[vecs[c][r] for c in basis] for r in rows]
    det = determinant(B)
    out = []
    for t in range(len(basis)):
        Bt = [[(vecs[target][r] if i == t else vecs[c][r]) for i, c in enumerate(basis)] for r in rows]
        out.append(tidy(div(determinant(Bt), det)))
    return out


def _exact_root(delta: Expr, frame) -> Expr:
    """sqrt(delta), written without a radical when delta factors as a square."""
    try:
        sd = sp.factor(sp.cancel(sp.together(to_sympy(delta))))
        num, den = sp.fraction(sd)
        parts = []
        for part in (num, den):
            c, facs = sp.factor_list(part)
            if c <= 0 or any(e % 2 for _, e in facs):
                raise ValueError("not a square")
            root = sp.sqrt(c)
            for base, e in facs:
                root *= base ** (e // 2)
            parts.append(root)
        return tidy(from_sympy(parts[0] / parts[1], frame.domain.columns))
    except (ValueError, ExprError, sp.PolynomialError, NotImplementedError):
        return sqrt(delta)


def solve_alg_within(sys, D_lo: Distribution, v1: VectorField, v2: VectorField,
                     D_k1: Distribution) -> AlgWithinReport:
    """At most two directions (a1, a2), up to scaling, solving the membership condition."""
    frame = sys.frame
    f = sys.f
    A = lie_bracket(v1, lie_bracket(v1, f))
    B = lie_bracket(v1, lie_bracket(v2, f))
    C = lie_bracket(v2, lie_bracket(v2, f))
    forms = annihilator(D_k1).basis
    vecs = [[tidy(w.contract(X)) for w in forms] for X in (A, B, C)]
    m = len(forms)
    report = AlgWithinReport()
    if m == 0:
        report.case = "D_k1 is the full space"
        candidates = [((ONE, ZERO), "unconstrained"), ((ZERO, ONE), "unconstrained")]
    else:
        V, E = frame.evaluate([x for vec in vecs for x in vec])
        V = V.reshape(-1, 3, m)
        E = E.reshape(-1, 3, m)
        nums = (V, E)

        def rk(idx):
            return generic_rank_of(V[:, idx], E[:, idx], frame.tau, "algWithin residuals")

        r = rk([0, 1, 2])
        report.residual_rank = r
        a_zero = rk([0]) == 0
        candidates = []
        if r == 0:
            report.case = "all residuals vanish"
            candidates = [((ONE, ZERO), report.case), ((ZERO, ONE), report.case)]
        elif r == 3:
            report.case = "residuals independent: only the trivial solution"
        elif r == 2:
            if a_zero:
                report.case = "rank 2, a = 0"
                candidates = [((ONE, ZERO), report.case)]
            elif rk([0, 1]) == 2:
                k1, k2 = _combination(frame, vecs, nums, 2, [0, 1])
                report.case = "rank 2, c = k1*a + k2*b"
                cond = tidy(add(mul(k2, k2), mul(4, k1)))
                if frame.is_zero(cond):
                    candidates = [((k2, MINUS_TWO), report.case)]
                else:
                    report.rejected.append(((to_text(k2), "-2"), "k2^2 + 4*k1 does not vanish"))
            else:
                report.case = "rank 2, b parallel to a: only the trivial solution"
        else:  # rank 1
            if not a_zero:
                kb, = _combination(frame, vecs, nums, 1, [0])
                kc, = _combination(frame, vecs, nums, 2, [0])
                delta = tidy(add(mul(kb, kb), neg(kc)))
                report.case = "rank 1, a != 0"
                if frame.is_zero(delta):
                    candidates = [((neg(kb), ONE), report.case + ", double root")]
                else:
                    dv, _ = frame.evaluate([delta])
                    dv = dv[np.isfinite(dv)]
                    if dv.size and np.all(dv < 0):
                        report.rejected.append((("-k1 +- sqrt(D)", "1"), "negative discriminant at every sample"))
                    else:
                        root = _exact_root(delta, frame)
                        candidates = [((tidy(add(neg(kb), root)), ONE), report.case),
                                      ((tidy(add(neg(kb), neg(root))), ONE), report.case)]
            else:
                b_zero = rk([1]) == 0
                if b_zero:
                    report.case = "rank 1, a = b = 0"
                    candidates = [((ONE, ZERO), report.case)]
                else:
                    kc, = _combination(frame, vecs, nums, 2, [1])
                    report.case = "rank 1, a = 0"
                    candidates = [((ONE, ZERO), report.case), ((kc, MINUS_TWO), report.case)]
    for (a1, a2), case in candidates:
        sol = _finish(frame, a1, a2, v1, v2, vecs, case)
        if isinstance(sol, str):
            report.rejected.append(((to_text(a1), to_text(a2)), sol))
        else:
            report.solutions.append(sol)
    assert len(report.solutions) <= 2
    return report


def _finish(frame, a1, a2, v1, v2, vecs, case):
    if vecs and vecs[0]:
        for comp in zip(*vecs):
            res = add(mul(a1, a1, comp[0]), mul(2, a1, a2, comp[1]), mul(a2, a2, comp[2]))
            try:
                ok = frame.is_zero(tidy(res))
            except ExprError as err:
                return f"verification failed: {err}"
            if not ok:
                return "candidate does not satisfy the membership condition at samples"
    if frame.is_zero(a2):
        if frame.is_zero(a1):
            return "trivial solution"
        alpha, norm = (ONE, ZERO), "(1,0)"
    else:
        alpha, norm = (tidy(div(a1, a2)), ONE), "a2=1"
    vc = v1.scaled(alpha[0]) + v2.scaled(alpha[1])
    return AlgWithinSolution(alpha, norm, vc, case)


__all__ = ["AlgWithinReport", "AlgWithinSolution", "solve_alg_within"]
