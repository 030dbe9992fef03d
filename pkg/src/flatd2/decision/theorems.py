"""Static feedback linearizability and flatness with difference d = 1, 2."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..liealg import (
    Distribution, bracket_with, cauchy_characteristic, derived_flag, involutive_closure,
    lie_bracket, span_sum,
)
from ..liealg.distribution import _stack
from ..liealg.linalg import greedy_independent
from .algwithin import solve_alg_within
from .model import SystemModel
from .trace import (
    FLAT_D1, FLAT_D2, SFL, BranchRecord, DecisionTrace, LadderSlot, Recorder, not_flat_verdict,
)


class AutonomousSubsystemError(RuntimeError):
    """The bracket sequence stalls below the full space: the system is not flat."""


@dataclass
class BracketSequence:
    distributions: list
    k1: Optional[int]
    stagnated: bool = False
    full_at: Optional[int] = None


def _max_steps(sys: SystemModel) -> int:
    return sys.n + 2


def bracket_sequence(sys: SystemModel) -> BracketSequence:
    f = sys.f
    frame = sys.frame
    D = [Distribution(frame, [frame.coordinate_field(u) for u in sys.inputs], "D_0")]
    for i in range(1, _max_steps(sys) + 1):
        prev = D[-1]
        if prev.is_full:
            return BracketSequence(D, None, False, i - 1)
        nxt = span_sum(prev, bracket_with(f, prev), label=f"D_{i}")
        if nxt.rank == prev.rank:
            return BracketSequence(D, None, True)
        D.append(nxt)
        if not nxt.is_involutive():
            return BracketSequence(D, i)
    return BracketSequence(D, None, not D[-1].is_full, len(D) - 1 if D[-1].is_full else None)


def build_bracket_sequence(sys: SystemModel):
    """D_0, D_1, ... up to the first non-involutive D_k1 or the full space.

    Returns ``(distributions, k1)``; ``k1`` is None when every D_i is
    involutive.  Raises :class:`AutonomousSubsystemError` on stagnation.
    """
    seq = bracket_sequence(sys)
    if seq.stagnated:
        raise AutonomousSubsystemError(
            f"D_{len(seq.distributions) - 1} stops growing below the full space; "
            "the system contains an autonomous subsystem"
        )
    return seq.distributions, seq.k1


def _confidence(sys):
    return {"seed": sys.seed, "samples": sys.samples, "tau": sys.tau, "zero_test": "probabilistic"}


def _new_trace(sys, theorem) -> DecisionTrace:
    return DecisionTrace(theorem, confidence=_confidence(sys))


def _slot(trace, name, missing=None) -> LadderSlot:
    if missing:
        lo, hi, closure = missing
        return LadderSlot(name, trace.distributions[lo].rank + 1, True, lo, hi, closure)
    return LadderSlot(name, trace.distributions[name].rank)


# ---------------------------------------------------------------- SFL

def static_feedback_linearizable(sys: SystemModel, seq: BracketSequence | None = None) -> DecisionTrace:
    seq = seq or bracket_sequence(sys)
    trace = _new_trace(sys, "sfl")
    branch = BranchRecord("sfl", path=["1"])
    rec = Recorder(trace, branch.claims)
    trace.branches.append(branch)
    for D in seq.distributions:
        rec.put(D.label, D)
    names = [D.label for D in seq.distributions]
    for name in names:
        if not rec.involutive("1", name):
            trace.k1 = seq.k1
            return _reject(trace, branch, "1", f"{name} is non-involutive")
    if seq.stagnated:
        trace.diagnosis = "autonomous subsystem"
        return _reject(trace, branch, "1", f"{names[-1]} stops growing below the full space; "
                       "the system contains an autonomous subsystem")
    last = names[-1]
    if not rec.full("1", last):
        return _reject(trace, branch, "1", "the D-sequence does not reach the full space")
    s = len(names) - 1
    if s > sys.n - 1:
        return _reject(trace, branch, "1", f"D_{sys.n - 1} is not the full space")
    branch.ladder = [_slot(trace, nm) for nm in names]
    branch.s = s
    return _accept(trace, branch, SFL)


def _reject(trace, branch, item, reason):
    branch.accepted = False
    branch.failed_item = item
    branch.reason = reason
    trace.accepted = False
    trace.path = list(branch.path)
    trace.failed_item = item
    trace.reason = reason
    trace.verdict = f"conditions of the {trace.theorem} test not met"
    return trace


def _accept(trace, branch, verdict):
    branch.accepted = True
    trace.accepted = True
    trace.verdict = verdict
    trace.path = list(branch.path)
    trace.s = branch.s
    if branch.k2 is not None:
        trace.k2 = branch.k2
    return trace


# ---------------------------------------------------------------- shared pieces

def _item1(rec, seq, k1):
    for i in range(1, k1 + 1):
        r = rec.rank("1", f"D_{i}")
        if r != 2 * (i + 1):
            return f"dim D_{i} = {r}, expected {2 * (i + 1)}"
    return None


def _ladder_tail(sys, rec, item, letter, start_index, start_name, suffix, ladder):
    """G_i = G_(i-1) + [f, G_(i-1)], all involutive, until the full space.

    Returns (s, failure reason or None).
    """
    trace = rec.trace
    name = start_name
    i = start_index
    for _ in range(_max_steps(sys) + 1):
        G = trace.distributions[name]
        if not rec.involutive(item, name):
            return None, f"{name} is non-involutive"
        if rec.full(item, name):
            return i, None
        nxt_name = f"{letter}_{i + 1}{suffix}"
        rec.put(nxt_name, span_sum(G, bracket_with(sys.f, G)))
        if rec.step(item, name, nxt_name) == 0:
            return None, f"{nxt_name} stops growing below the full space"
        ladder.append(_slot(trace, nxt_name))
        name = nxt_name
        i += 1
    return None, "sequence did not reach the full space within the step bound"


def _closure_step(sys, rec, item_i, item_ii, name, allow_full, suffix):
    """Checks closure +1 and then full space (if allowed) or +1 growth of [f,G]+closure."""
    trace = rec.trace
    G = trace.distributions[name]
    cname = f"closure({name})"
    rec.put(cname, involutive_closure(G))
    step = rec.step(item_i, name, cname)
    if step != 1:
        return None, item_i, f"dim closure({name}) = dim {name} + {step}"
    if allow_full and rec.full(item_ii, cname):
        return cname, None, None
    gname = f"[f,{name}]+{cname}"
    rec.put(gname, span_sum(bracket_with(sys.f, G), trace.distributions[cname]))
    step = rec.step(item_ii, cname, gname)
    if step != 1:
        return None, item_ii, f"dim [f,{name}]+closure({name}) = dim closure({name}) + {step}"
    return cname, None, None


def _completion_pair(D_lo: Distribution, D_hi: Distribution):
    """First two generators of D_hi independent modulo D_lo, in generator order."""
    lo = list(D_lo.basis)
    hi = list(D_hi.basis)
    v, e = _stack(lo + hi)
    picked = greedy_independent(v, e, D_hi.frame.tau, range(len(lo), len(lo) + len(hi)),
                                fixed=range(len(lo)))
    if len(picked) < 2:
        raise RuntimeError("D_(k1-1) does not extend D_(k1-2) by two directions")
    allv = lo + hi
    return allv[picked[0]], allv[picked[1]]


# ---------------------------------------------------------------- d = 1

def check_d1(sys: SystemModel, seq: BracketSequence | None = None) -> DecisionTrace:
    seq = seq or bracket_sequence(sys)
    trace = _new_trace(sys, "d1")
    branch = BranchRecord("main", path=[])
    trace.branches.append(branch)
    rec = Recorder(trace, branch.claims)
    for D in seq.distributions:
        rec.put(D.label, D)
    k1 = seq.k1
    trace.k1 = k1
    if k1 is None:
        if seq.stagnated:
            trace.diagnosis = "autonomous subsystem"
        return _reject(trace, branch, "1", "no non-involutive D_i: k1 does not exist")
    branch.path.append("1")
    bad = _item1(rec, seq, k1)
    if bad:
        return _reject(trace, branch, "1", bad)
    lo, hi = f"D_{k1 - 1}", f"D_{k1}"
    ladder = [_slot(trace, f"D_{i}") for i in range(k1)]
    if rec.in_cauchy("2", lo, hi):
        branch.path.append("2a")
        cname, failed, why = _closure_step(sys, rec, "2a.I", "2a.II", hi, True, "")
        if failed:
            return _reject(trace, branch, failed, why)
        ename = f"E_{k1 + 1}"
        rec.put(ename, trace.distributions[cname])
        ladder.append(_slot(trace, f"E_{k1}", (lo, hi, ename)))
        ladder.append(_slot(trace, ename))
        start, sname = k1 + 1, ename
    else:
        branch.path.append("2b")
        cname = f"C({hi})"
        rec.put(cname, cauchy_characteristic(trace.distributions[hi]))
        ename = f"E_{k1}"
        rec.put(ename, span_sum(trace.distributions[lo], trace.distributions[cname]))
        if not rec.involutive("2b", ename):
            return _reject(trace, branch, "2b", f"{ename} = {lo} + C({hi}) of item 2b is non-involutive")
        ladder.append(_slot(trace, ename))
        start, sname = k1, ename
    branch.path.append("3")
    s, why = _ladder_tail(sys, rec, "3", "E", start, sname, "", ladder)
    if why:
        return _reject(trace, branch, "3", why)
    branch.ladder = ladder
    branch.s = s
    return _accept(trace, branch, FLAT_D1)


# ---------------------------------------------------------------- d = 2

def check_d2(sys: SystemModel, seq: BracketSequence | None = None) -> DecisionTrace:
    seq = seq or bracket_sequence(sys)
    trace = _new_trace(sys, "d2")
    main = BranchRecord("main", path=[])
    rec = Recorder(trace, trace.claims)
    for D in seq.distributions:
        rec.put(D.label, D)
    k1 = seq.k1
    trace.k1 = k1
    if k1 is None:
        trace.branches.append(main)
        if seq.stagnated:
            trace.diagnosis = "autonomous subsystem"
        return _reject(trace, main, "1", "no non-involutive D_i: k1 does not exist")
    bad = _item1(rec, seq, k1)
    if bad:
        main.path.append("1")
        trace.branches.append(main)
        return _reject(trace, main, "1", bad)
    lo, hi = f"D_{k1 - 1}", f"D_{k1}"
    base_ladder = [_slot(trace, f"D_{i}") for i in range(k1)]
    if rec.in_cauchy("2", lo, hi):
        trace.branches.append(main)
        main.path.append("1")
        _d2_case_2a(sys, trace, main, k1, base_ladder)
    else:
        _d2_case_2b(sys, trace, k1)
    accepted = trace.accepted_branches
    if accepted:
        return _accept(trace, accepted[0], FLAT_D2)
    first = trace.branches[0]
    _reject(trace, first, first.failed_item, first.reason)
    if len(trace.branches) > 1:
        trace.reason = "; ".join(f"branch {b.branch_id}: {b.failed_item}: {b.reason}" for b in trace.branches)
    return trace


def _fail(branch, item, reason):
    branch.accepted = False
    branch.failed_item = item
    branch.reason = reason
    return branch


def _d2_case_2a(sys, trace, branch, k1, ladder):
    rec = Recorder(trace, branch.claims)
    lo, hi = f"D_{k1 - 1}", f"D_{k1}"
    cname = f"closure({hi})"
    rec.put(cname, involutive_closure(trace.distributions[hi]))
    step = rec.step("2a", hi, cname)
    if step == 1:
        branch.path.append("2aA")
        gname = f"[f,{hi}]+{cname}"
        rec.put(gname, span_sum(bracket_with(sys.f, trace.distributions[hi]), trace.distributions[cname]))
        g = rec.step("2aA", cname, gname)
        if g != 1:
            return _fail(branch, "2aA", f"dim [f,{hi}]+closure({hi}) = dim closure({hi}) + {g}")
        ename = f"E_{k1 + 1}"
        rec.put(ename, trace.distributions[cname])
        ladder.append(_slot(trace, f"E_{k1}", (lo, hi, ename)))
        ladder.append(_slot(trace, ename))
        return _d2_item3b(sys, trace, branch, k1, k1 + 1, ename, "", ladder)
    if step == 2:
        branch.path.append("2aB")
        d1 = f"{hi}^(1)"
        rec.put(d1, derived_flag(trace.distributions[hi]))
        cn = f"C({d1})"
        rec.put(cn, cauchy_characteristic(trace.distributions[d1]))
        fc = f"[f,{cn}]"
        rec.put(fc, bracket_with(sys.f, trace.distributions[cn]))
        if not rec.subset("2aB", fc, d1):
            return _fail(branch, "2aB", f"[f,C({d1})] is not contained in {d1}")
        k2 = k1 + 1
        branch.k2 = k2
        e_lo, e_hi = f"E_{k2 - 1}", f"E_{k2}"
        rec.put(e_lo, trace.distributions[cn])
        rec.put(e_hi, trace.distributions[d1])
        ladder.append(_slot(trace, e_lo))
        branch.path.append("4a.II")
        return _d2_item4a(sys, trace, branch, k2, "", ladder, skip_first=True)
    return _fail(branch, "2a", f"dim closure({hi}) = dim {hi} + {step}")


def _d2_case_2b(sys, trace, k1):
    frame = sys.frame
    D_lo = trace.distributions[f"D_{k1 - 2}"] if k1 >= 2 else Distribution.zero(frame, "0")
    D_mid = trace.distributions[f"D_{k1 - 1}"]
    D_hi = trace.distributions[f"D_{k1}"]
    v1, v2 = _completion_pair(D_lo, D_mid)
    report = solve_alg_within(sys, D_lo, v1, v2, D_hi)
    trace.alg_within = [report.to_json()]
    sols = report.solutions
    if not sols:
        b = BranchRecord("1", path=["1", "2b"])
        trace.branches.append(b)
        why = "no solution of the membership condition"
        if report.rejected:
            why += " (" + "; ".join(r for _, r in report.rejected) + ")"
        return _fail(b, "2b", why)
    for idx, sol in enumerate(sols, start=1):
        suffix = f",{idx}" if len(sols) > 1 else ""
        b = BranchRecord(str(idx), path=["1", "2b"], alpha=sol.text(), vc=str(sol.vc),
                         vc_field=sol.vc)
        trace.branches.append(b)
        rec = Recorder(trace, b.claims)
        e_lo, e_hi = f"E_{k1 - 1}{suffix}", f"E_{k1}{suffix}"
        rec.put(e_lo, Distribution(frame, list(D_lo.basis) + [sol.vc]))
        rec.put(e_hi, Distribution(frame, list(D_mid.basis) + [lie_bracket(sol.vc, sys.f)]))
        if not rec.in_cauchy("2b", e_lo, e_hi):
            _fail(b, "2b", f"{e_lo} is not contained in C({e_hi})")
            continue
        ladder = [_slot(trace, f"D_{i}") for i in range(k1 - 1)] + [_slot(trace, e_lo)]
        if rec.involutive("3", e_hi):
            ladder.append(_slot(trace, e_hi))
            _d2_item3b(sys, trace, b, k1, k1, e_hi, suffix, ladder)
            continue
        b.path.append("3a")
        cname, failed, why = _closure_step(sys, rec, "3a.I", "3a.II", e_hi, False, suffix)
        if failed:
            _fail(b, failed, why)
            continue
        fname = f"F_{k1 + 1}{suffix}"
        rec.put(fname, trace.distributions[cname])
        ladder.append(_slot(trace, f"F_{k1}{suffix}", (e_lo, e_hi, fname)))
        ladder.append(_slot(trace, fname))
        _d2_item5(sys, trace, b, k1 + 1, fname, suffix, ladder)


def _d2_item3b(sys, trace, branch, k1, start, start_name, suffix, ladder):
    """E_i = E_(i-1) + [f, E_(i-1)] up to the first non-involutive E_k2."""
    rec = Recorder(trace, branch.claims)
    branch.path.append("3b")
    name = start_name
    i = start
    for _ in range(_max_steps(sys) + 1):
        if i >= k1 + 1:
            r = rec.rank("3b.II", name)
            if r != 2 * i + 1:
                return _fail(branch, "3b.II", f"dim {name} = {r}, expected {2 * i + 1}")
        if not rec.involutive("3b.I", name):
            k2 = i
            branch.k2 = k2
            ladder.pop()  # E_k2 is not part of the involutive ladder
            return _d2_item4(sys, trace, branch, k2, suffix, ladder)
        if rec.full("3b.I", name):
            return _fail(branch, "3b.I", "every E_i is involutive: k2 does not exist")
        G = trace.distributions[name]
        nxt = f"E_{i + 1}{suffix}"
        rec.put(nxt, span_sum(G, bracket_with(sys.f, G)))
        if rec.step("3b.I", name, nxt) == 0:
            return _fail(branch, "3b.I", f"{nxt} stops growing below the full space")
        ladder.append(_slot(trace, nxt))
        name = nxt
        i += 1
    return _fail(branch, "3b.I", "no non-involutive E_i within the step bound")


def _d2_item4(sys, trace, branch, k2, suffix, ladder):
    rec = Recorder(trace, branch.claims)
    e_lo, e_hi = f"E_{k2 - 1}{suffix}", f"E_{k2}{suffix}"
    if rec.in_cauchy("4", e_lo, e_hi):
        branch.path.append("4a")
        return _d2_item4a(sys, trace, branch, k2, suffix, ladder, skip_first=False)
    branch.path.append("4b")
    cn = f"C({e_hi})"
    rec.put(cn, cauchy_characteristic(trace.distributions[e_hi]))
    fname = f"F_{k2}{suffix}"
    rec.put(fname, span_sum(trace.distributions[e_lo], trace.distributions[cn]))
    if not rec.involutive("4b", fname):
        return _fail(branch, "4b", f"{fname} = {e_lo} + C({e_hi}) is non-involutive")
    ladder.append(_slot(trace, fname))
    return _d2_item5(sys, trace, branch, k2, fname, suffix, ladder)


def _d2_item4a(sys, trace, branch, k2, suffix, ladder, skip_first):
    rec = Recorder(trace, branch.claims)
    e_lo, e_hi = f"E_{k2 - 1}{suffix}", f"E_{k2}{suffix}"
    if skip_first:
        cname = f"closure({e_hi})"
        rec.put(cname, involutive_closure(trace.distributions[e_hi]))
        if not rec.full("4a.II", cname):
            gname = f"[f,{e_hi}]+{cname}"
            rec.put(gname, span_sum(bracket_with(sys.f, trace.distributions[e_hi]),
                                    trace.distributions[cname]))
            step = rec.step("4a.II", cname, gname)
            if step != 1:
                return _fail(branch, "4a.II",
                             f"dim [f,{e_hi}]+closure({e_hi}) = dim closure({e_hi}) + {step}")
    else:
        cname, failed, why = _closure_step(sys, rec, "4a.I", "4a.II", e_hi, True, suffix)
        if failed:
            return _fail(branch, failed, why)
    fname = f"F_{k2 + 1}{suffix}"
    rec.put(fname, trace.distributions[cname])
    ladder.append(_slot(trace, f"F_{k2}{suffix}", (e_lo, e_hi, fname)))
    ladder.append(_slot(trace, fname))
    return _d2_item5(sys, trace, branch, k2 + 1, fname, suffix, ladder)


def _d2_item5(sys, trace, branch, start, start_name, suffix, ladder):
    rec = Recorder(trace, branch.claims)
    branch.path.append("5")
    s, why = _ladder_tail(sys, rec, "5", "F", start, start_name, suffix, ladder)
    if why:
        return _fail(branch, "5", why)
    branch.s = s
    branch.ladder = ladder
    branch.accepted = True
    return branch


# ---------------------------------------------------------------- classify

@dataclass
class Classification:
    d: Optional[int]
    verdict: str
    traces: list = field(default_factory=list)
    diagnosis: str = ""

    @property
    def trace(self) -> DecisionTrace:
        """The deciding trace (the accepted one, else the last one run)."""
        for t in self.traces:
            if t.accepted:
                return t
        return self.traces[-1]

    @property
    def path(self) -> list:
        return self.trace.path

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "verdict": self.verdict,
            "diagnosis": self.diagnosis,
            "traces": [t.to_json() for t in self.traces],
        }


def classify(sys: SystemModel, dmax: int = 2) -> Classification:
    """SFL, then d=1, then d=2; the first accepting test fixes d."""
    if dmax not in (0, 1, 2):
        raise ValueError("dmax must be 0, 1 or 2")
    seq = bracket_sequence(sys)
    traces = []
    tests = [static_feedback_linearizable, check_d1, check_d2][: dmax + 1]
    for test in tests:
        t = test(sys, seq)
        traces.append(t)
        if t.accepted:
            return Classification(t.d, t.verdict, traces)
    diag = "autonomous subsystem" if seq.stagnated else ""
    return Classification(None, not_flat_verdict(dmax), traces, diag)
