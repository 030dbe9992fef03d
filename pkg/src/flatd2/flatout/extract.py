"""Flat outputs read off the involutive ladder of an accepted trace."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..liealg import Codistribution, Distribution, OneForm, annihilator, differential, tidy
from ..symexpr import Expr, ExprError, to_text
from .integrate import find_functions
from .missing import complete_missing


class ExtractionError(ExprError):
    pass


@dataclass
class RelativeDegreeReport:
    k: tuple  # derivatives of each component before an input appears
    n: int

    @property
    def r1(self) -> int:
        return self.n - self.k[1]

    @property
    def r2(self) -> int:
        return self.n - self.k[0]

    @property
    def d(self) -> int:
        return self.n - self.k[0] - self.k[1]

    def to_json(self) -> dict:
        return {"k": list(self.k), "r": [self.r1, self.r2], "d": self.d}


@dataclass
class FlatOutputCandidate:
    components: list  # Expr, OneForm when no antiderivative was found, None if not attempted
    branch_id: str
    recipe: str  # "codim-2" or "codim-1"
    s: int
    l: int | None = None
    spans: dict = field(default_factory=dict)  # role -> distribution label
    completions: dict = field(default_factory=dict)  # slot name -> Completion
    ladder: list = field(default_factory=list, repr=False)

    @property
    def integrated(self) -> list:
        return [isinstance(c, Expr) for c in self.components]

    @property
    def complete(self) -> bool:
        return all(self.integrated)

    @property
    def partial(self) -> bool:
        return any(c is None for c in self.components)

    def text(self) -> list:
        out = []
        for c in self.components:
            if c is None:
                out.append(None)
            else:
                out.append(to_text(c) if isinstance(c, Expr) else f"form {c}")
        return out

    def to_json(self) -> dict:
        return {
            "branch": self.branch_id,
            "recipe": self.recipe,
            "components": self.text(),
            "integrated": self.integrated,
            "partial": self.partial,
            "s": self.s,
            "l": self.l,
            "spans": dict(self.spans),
            "completions": {k: v.to_json() for k, v in sorted(self.completions.items())},
        }


def lie_derivative(sys, h: Expr) -> Expr:
    return tidy(sys.f.apply(h))


def relative_degrees(sys, phis) -> RelativeDegreeReport:
    frame = sys.frame
    ks = []
    for phi in phis:
        h, k = phi, None
        for step in range(sys.n + 3):
            if any(not frame.is_zero(tidy(differential(frame, h).coeffs[frame.index(u)]))
                   for u in sys.inputs):
                k = step
                break
            h = lie_derivative(sys, h)
        if k is None:
            raise ExtractionError(f"no input reaches {to_text(phi)} within n+2 derivatives")
        ks.append(k)
    return RelativeDegreeReport(tuple(ks), sys.n)


def _pick_branch(trace, branch_id=None):
    if not trace.accepted:
        raise ExtractionError("trace is not accepted; no flat output to extract")
    for b in trace.branches:
        if b.accepted and (branch_id is None or b.branch_id == branch_id):
            return b
    raise ExtractionError(f"no accepted branch {branch_id!r}")


def ladder_distributions(sys, trace, branch, completions=None) -> tuple:
    """(distributions along the ladder, completions made for missing slots)."""
    completions = dict(completions or {})
    out = []
    for slot in branch.ladder:
        if slot.missing:
            if slot.name not in completions:
                D = trace.distributions
                completions[slot.name] = complete_missing(
                    sys, D[slot.lo], D[slot.hi], D[slot.closure], slot.name)
            out.append(completions[slot.name].distribution)
        else:
            out.append(trace.distributions[slot.name])
    return out, completions


def _recipe(sys, dists):
    N = sys.frame.dim
    ranks = [D.rank for D in dists]
    if N not in ranks:
        raise ExtractionError("ladder never reaches the full space")
    s = ranks.index(N)
    if s == 0:
        raise ExtractionError("ladder starts at the full space")
    codim = N - ranks[s - 1]
    if codim == 2:
        return s, None, codim
    if codim != 1:
        raise ExtractionError(f"codimension {codim} below the full space")
    steps = [ranks[0]] + [ranks[i] - ranks[i - 1] for i in range(1, len(ranks))]
    twos = [i for i in range(s) if steps[i] == 2]
    if not twos:
        raise ExtractionError("no two-step rung in the ladder")
    return s, twos[-1], codim


def _perp(frame, dists, i) -> Codistribution:
    if i < 0:
        return annihilator(Distribution.zero(frame))
    return annihilator(dists[i])


def extract_flat_output(sys, trace, branch_id=None) -> FlatOutputCandidate:
    branch = _pick_branch(trace, branch_id)
    dists, completions = ladder_distributions(sys, trace, branch)
    frame = sys.frame
    s, l, codim = _recipe(sys, dists)
    names = [slot.name for slot in branch.ladder]
    P = _perp(frame, dists, s - 1)
    cand = FlatOutputCandidate([], branch.branch_id, f"codim-{codim}", s, l,
                               completions=completions, ladder=dists)
    cand.spans["first"] = names[s - 1]
    if codim == 2:
        found = find_functions(sys, P, 2, [])
        forms = list(P.reduced().basis)
        comps = list(found)
        for w in forms:
            if len(comps) == 2:
                break
            if not _dspan(frame, comps + [w]).rank > len(comps):
                continue
            comps.append(w)
        cand.components = comps
        return cand
    first = find_functions(sys, P, 1, [])
    if not first:
        # the Lie chain needs a closed-form first component
        cand.components = [P.reduced().basis[0], None]
        return cand
    phi1 = first[0]
    chain = [phi1]
    for _ in range(s - l):
        chain.append(lie_derivative(sys, chain[-1]))
    Q = _perp(frame, dists, l - 1)
    cand.spans["second"] = names[l - 1] if l >= 1 else "0"
    if not Q.contains_all([differential(frame, h) for h in chain]):
        raise ExtractionError("Lie chain of the first component leaves the second annihilator")
    second = find_functions(sys, Q, 1, chain)
    if second:
        cand.components = [phi1, second[0]]
    else:
        known = Codistribution(frame, [differential(frame, h) for h in chain])
        rest = [w for w in Q.reduced().basis if not known.contains(w)]
        cand.components = [phi1, rest[0]]
    return cand


@dataclass
class FlatOutputCheck:
    accepted: bool
    reasons: list
    degrees: RelativeDegreeReport | None = None

    def to_json(self) -> dict:
        return {"accepted": self.accepted, "reasons": list(self.reasons),
                "relative_degrees": self.degrees.to_json() if self.degrees else None}


def _dspan(frame, comps) -> Codistribution:
    return Codistribution(frame, [c if isinstance(c, OneForm) else differential(frame, c) for c in comps])


def verify_flat_output(sys, trace, candidate, branch_id=None) -> FlatOutputCheck:
    """Span conditions of the ladder recipe plus d = n - k1 - k2.

    ``candidate`` is a FlatOutputCandidate or a pair of expressions.
    """
    frame = sys.frame
    if isinstance(candidate, FlatOutputCandidate):
        comps = list(candidate.components)
        branch_id = branch_id or candidate.branch_id
        completions = candidate.completions
    else:
        comps = list(candidate)
        completions = {}
    if len(comps) != 2 or any(c is None for c in comps):
        return FlatOutputCheck(False, ["expected two components"])
    branch = _pick_branch(trace, branch_id)
    dists, _ = ladder_distributions(sys, trace, branch, completions)
    s, l, codim = _recipe(sys, dists)
    P = _perp(frame, dists, s - 1)
    reasons = []
    if codim == 2:
        if not _dspan(frame, comps).same_span(P):
            reasons.append("differentials do not span the annihilator of the last proper rung")
    else:
        Q = _perp(frame, dists, l - 1)
        ok = False
        for a, b in ((0, 1), (1, 0)):
            if not isinstance(comps[a], Expr) or not _dspan(frame, [comps[a]]).same_span(P):
                continue
            chain = [comps[a]]
            for _ in range(s - l):
                chain.append(lie_derivative(sys, chain[-1]))
            if _dspan(frame, chain + [comps[b]]).same_span(Q):
                ok = True
                break
        if not ok:
            reasons.append("no ordering satisfies both span conditions")
    degrees = None
    if all(isinstance(c, Expr) for c in comps):
        try:
            degrees = relative_degrees(sys, comps)
        except ExtractionError as err:
            reasons.append(str(err))
        else:
            if degrees.d != trace.d:
                reasons.append(f"relative degrees give d={degrees.d}, trace says d={trace.d}")
    else:
        reasons.append("not integrated: only the differential span was checked")
    accepted = not reasons or reasons == ["not integrated: only the differential span was checked"]
    return FlatOutputCheck(accepted, reasons, degrees)
