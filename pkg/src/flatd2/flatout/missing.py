"""Completion of the one involutive rung the theorems leave implicit."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..liealg import Distribution, annihilator, differential, lie_bracket, nullspace, tidy
from ..symexpr import Expr, ExprError, neg, to_text


class MissingDistributionError(ExprError):
    """No admissible direction exists; the theorem conditions should have ruled this out."""


@dataclass
class Completion:
    distribution: Distribution
    method: str  # "v" (unique direction) or "psi"
    psi: Expr | None = None
    alternatives: list = field(default_factory=list)  # other admissible psi, as text

    def to_json(self) -> dict:
        out = {"method": self.method, "generators": [str(g) for g in self.distribution.basis]}
        if self.psi is not None:
            out["psi"] = to_text(self.psi)
            out["psi_alternatives"] = list(self.alternatives)
        return out


def complete_missing_distribution(sys, D_lo: Distribution, D_hi: Distribution,
                                  closure_hi: Distribution, label: str = "") -> Distribution:
    return complete_missing(sys, D_lo, D_hi, closure_hi, label).distribution


def complete_missing(sys, D_lo: Distribution, D_hi: Distribution, closure_hi: Distribution,
                     label: str = "", enumerate_psi: bool = False) -> Completion:
    """D_lo plus one direction v of D_hi with [f, v] inside closure_hi.

    If closure_hi is the full space every such direction works and one is
    fixed through a function psi with d psi annihilating D_lo.
    """
    from ..decision.theorems import _completion_pair
    from .integrate import find_functions

    frame = sys.frame
    v1, v2 = _completion_pair(D_lo, D_hi)
    if not closure_hi.is_full:
        forms = annihilator(closure_hi).basis
        b1, b2 = lie_bracket(v1, sys.f), lie_bracket(v2, sys.f)
        rows = [[tidy(w.contract(b1)), tidy(w.contract(b2))] for w in forms]
        vals, errs = frame.evaluate([x for r in rows for x in r])
        vals = vals.reshape(-1, len(rows), 2)
        errs = errs.reshape(-1, len(rows), 2)
        kern = nullspace(rows, vals, errs, frame.tau, tidy)
        if len(kern) != 1:
            raise MissingDistributionError(
                f"expected a unique direction v with [v,f] in the closure, found {len(kern)}"
            )
        c1, c2 = kern[0]
        v = v1.scaled(c1) + v2.scaled(c2)
        out = Distribution(frame, list(D_lo.basis) + [v], label)
        return Completion(out, "v")
    psis = find_functions(sys, annihilator(D_lo), 2 if enumerate_psi else 1, [])
    if not psis:
        raise MissingDistributionError("no closed-form psi with d psi annihilating the lower distribution")
    psi = psis[0]
    dpsi = differential(frame, psi)
    v = v1.scaled(dpsi.contract(v2)) + v2.scaled(neg(dpsi.contract(v1)))
    if v.is_structurally_zero:
        raise MissingDistributionError("psi does not separate the completing directions")
    out = Distribution(frame, list(D_lo.basis) + [v], label)
    return Completion(out, "psi", psi, [to_text(p) for p in psis[1:]])
