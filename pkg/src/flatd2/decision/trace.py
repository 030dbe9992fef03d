"""Decision traces: recorded claims, branches and verdicts."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..liealg import Distribution, in_cauchy

SFL = "static feedback linearizable (d=0)"
FLAT_D1 = "flat, d=1"
FLAT_D2 = "flat, d=2"


def not_flat_verdict(dmax: int) -> str:
    return f"flat only with d ≥ {dmax + 1}, or not flat"


LEGAL_PATHS = {
    "sfl": [("1",)],
    "d1": [("1", "2a", "3"), ("1", "2b", "3")],
    "d2": [
        ("1", "2aA", "3b", "4a", "5"),
        ("1", "2aA", "3b", "4b", "5"),
        ("1", "2aB", "4a.II", "5"),
        ("1", "2b", "3a", "5"),
        ("1", "2b", "3b", "4a", "5"),
        ("1", "2b", "3b", "4b", "5"),
    ],
}

CLAIM_KINDS = ("rank", "step", "involutive", "subset", "in_cauchy", "full")


@dataclass
class Claim:
    """One checked fact about named distributions.

    ``kind`` is one of CLAIM_KINDS; ``observed`` is what was computed
    (an int for rank/step, a bool otherwise).
    """

    item: str
    kind: str
    args: tuple
    observed: object

    def to_json(self) -> dict:
        return {"item": self.item, "kind": self.kind, "args": list(self.args), "observed": self.observed}


def evaluate_claim(kind: str, dists: list) -> object:
    if kind == "rank":
        return dists[0].rank
    if kind == "step":
        return dists[1].rank - dists[0].rank
    if kind == "involutive":
        return dists[0].is_involutive()
    if kind == "subset":
        return dists[0].issubset(dists[1])
    if kind == "in_cauchy":
        outer = dists[1]
        return all(in_cauchy(outer, v) for v in dists[0].basis)
    if kind == "full":
        return dists[0].is_full
    raise ValueError(f"unknown claim kind {kind!r}")


@dataclass
class LadderSlot:
    """One rung of the involutive sequence used for flat-output extraction.

    A slot with ``missing=True`` is a distribution the theorems do not
    construct explicitly; it sits strictly between ``lo`` and ``hi`` with
    rank(lo)+1 and [f, slot] inside ``closure``.
    """

    name: str
    rank: int
    missing: bool = False
    lo: str = ""
    hi: str = ""
    closure: str = ""

    def to_json(self) -> dict:
        out = {"name": self.name, "rank": self.rank}
        if self.missing:
            out.update(missing=True, lo=self.lo, hi=self.hi, closure=self.closure)
        return out


@dataclass
class BranchRecord:
    branch_id: str
    path: list = field(default_factory=list)
    accepted: bool = False
    reason: str = ""
    failed_item: str = ""
    alpha: Optional[tuple] = None
    vc: str = ""
    k2: Optional[int] = None
    s: Optional[int] = None
    ladder: list = field(default_factory=list)
    claims: list = field(default_factory=list)
    vc_field: object = field(default=None, repr=False, compare=False)  # VectorField, not serialized

    def to_json(self) -> dict:
        return {
            "branch": self.branch_id,
            "path": list(self.path),
            "accepted": self.accepted,
            "reason": self.reason,
            "failed_item": self.failed_item,
            "alpha": list(self.alpha) if self.alpha else None,
            "vc": self.vc,
            "k2": self.k2,
            "s": self.s,
            "ladder": [slot.to_json() for slot in self.ladder],
        }


@dataclass
class DecisionTrace:
    theorem: str  # "sfl", "d1" or "d2"
    verdict: str = ""
    accepted: bool = False
    path: list = field(default_factory=list)
    k1: Optional[int] = None
    k2: Optional[int] = None
    s: Optional[int] = None
    reason: str = ""
    failed_item: str = ""
    diagnosis: str = ""
    distributions: dict = field(default_factory=dict)
    claims: list = field(default_factory=list)
    branches: list = field(default_factory=list)
    alg_within: list = field(default_factory=list)
    confidence: dict = field(default_factory=dict)

    @property
    def d(self) -> Optional[int]:
        return {"sfl": 0, "d1": 1, "d2": 2}[self.theorem] if self.accepted else None

    @property
    def accepted_branches(self) -> list:
        return [b for b in self.branches if b.accepted]

    def all_claims(self) -> list:
        out = list(self.claims)
        for b in self.branches:
            out.extend(b.claims)
        return out

    def replay(self) -> list:
        """Re-check every claim on fresh copies of the stored distributions.

        Returns the list of claims whose recomputed value differs (empty on
        success).
        """
        fresh = {}

        def get(name):
            if name not in fresh:
                d = self.distributions[name]
                fresh[name] = Distribution(d.frame, d.gens, d.label)
            return fresh[name]

        bad = []
        for c in self.all_claims():
            got = evaluate_claim(c.kind, [get(a) for a in c.args])
            if got != c.observed:
                bad.append(c)
        return bad

    def path_is_legal(self) -> bool:
        if not self.accepted:
            return True
        paths = LEGAL_PATHS[self.theorem]
        if self.theorem == "sfl":
            return True
        return all(tuple(b.path) in paths for b in self.accepted_branches)

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "verdict": self.verdict,
            "accepted": self.accepted,
            "path": list(self.path),
            "k1": self.k1,
            "k2": self.k2,
            "s": self.s,
            "reason": self.reason,
            "failed_item": self.failed_item,
            "diagnosis": self.diagnosis,
            "distributions": [
                {"name": name, "rank": d.rank, "generators": [str(g) for g in d.basis]}
                for name, d in self.distributions.items()
            ],
            "claims": [c.to_json() for c in self.claims],
            "branches": [b.to_json() for b in self.branches],
            "alg_within": list(self.alg_within),
            "confidence": dict(self.confidence),
        }


class Recorder:
    """Computes facts about distributions and logs them as claims."""

    def __init__(self, trace: DecisionTrace, claims: list):
        self.trace = trace
        self.claims = claims

    def put(self, name: str, D: Distribution) -> Distribution:
        D = D.named(name) if D.label != name else D
        self.trace.distributions[name] = D
        return D

    def _log(self, item, kind, names):
        dists = [self.trace.distributions[n] for n in names]
        val = evaluate_claim(kind, dists)
        self.claims.append(Claim(item, kind, tuple(names), val))
        return val

    def rank(self, item, a):
        return self._log(item, "rank", [a])

    def step(self, item, a, b):
        return self._log(item, "step", [a, b])

    def involutive(self, item, a):
        return self._log(item, "involutive", [a])

    def subset(self, item, a, b):
        return self._log(item, "subset", [a, b])

    def in_cauchy(self, item, a, b):
        return self._log(item, "in_cauchy", [a, b])

    def full(self, item, a):
        return self._log(item, "full", [a])
