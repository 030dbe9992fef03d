"""Distributions and codistributions with sample-based rank decisions."""
from __future__ import annotations

from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from ..symexpr import ZERO, as_expr, div
from .fields import Frame, OneForm, VectorField, batch_numeric, lie_bracket, tidy
from .linalg import DegeneracyError, determinant, generic_rank_of, greedy_independent, nullspace


def _stack(objs):
    nums = batch_numeric(objs)
    if not objs:
        return None, None
    v = np.stack([n[0] for n in nums], axis=1)
    e = np.stack([n[1] for n in nums], axis=1)
    return v, e


class _Span:
    kind = "span"

    def __init__(self, frame: Frame, gens: Iterable, label: str = ""):
        self.frame = frame
        self.gens = tuple(g for g in gens if not g.is_structurally_zero)
        for g in self.gens:
            if g.frame is not frame:
                raise ValueError("generator from a different frame")
        self.label = label
        self._basis = None

    def __len__(self):
        return len(self.gens)

    def __repr__(self):
        name = self.label or type(self).__name__
        return f"<{name} rank={self.rank}: {'; '.join(str(g) for g in self.basis)}>"

    def named(self, label: str):
        out = type(self)(self.frame, self.gens, label)
        out._basis = self._basis
        return out

    def _rank_of(self, objs) -> int:
        if not objs:
            return 0
        v, e = _stack(list(objs))
        return generic_rank_of(v, e, self.frame.tau, self.label or self.kind)

    @property
    def basis(self) -> tuple:
        """Independent generators, chosen greedily in generator order."""
        if self._basis is None:
            if not self.gens:
                self._basis = ()
            else:
                v, e = _stack(list(self.gens))
                idx = greedy_independent(v, e, self.frame.tau, range(len(self.gens)))
                self._basis = tuple(self.gens[i] for i in idx)
                total = generic_rank_of(v, e, self.frame.tau, self.label or self.kind)
                if total != len(self._basis):
                    raise DegeneracyError(f"greedy basis of {self.label or self.kind} lost rank")
        return self._basis

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def is_full(self) -> bool:
        return self.rank == self.frame.dim

    def contains(self, obj) -> bool:
        return self.contains_all([obj])

    def contains_all(self, objs: Sequence) -> bool:
        objs = [o for o in objs if not o.is_structurally_zero]
        if not objs:
            return True
        if self.is_full:
            return True
        return self._rank_of(list(self.basis) + objs) == self.rank

    def issubset(self, other) -> bool:
        return other.contains_all(list(self.basis))

    def same_span(self, other) -> bool:
        return self.rank == other.rank and self.issubset(other)

    def reduced(self):
        """Equivalent generators with an identity block on pivot coordinates."""
        gens = self.basis
        r = len(gens)
        if r == 0:
            return self
        n = self.frame.dim
        v, e = _stack(list(gens))
        cost = [sum(g.coeffs[j].size for g in gens) for j in range(n)]
        order = sorted(range(n), key=lambda j: (cost[j], -j))
        cv = np.transpose(v, (0, 2, 1))
        ce = np.transpose(e, (0, 2, 1))
        piv = sorted(greedy_independent(cv, ce, self.frame.tau, order))
        C = [[g.coeffs[j] for j in piv] for g in gens]
        det = determinant(C)
        out = []
        for t in range(r):
            coeffs = [ZERO] * n
            for j in range(n):
                if j in piv:
                    coeffs[j] = as_expr(1 if piv.index(j) == t else 0)
                    continue
                Ct = [[(g.coeffs[j] if c == t else C[s][c]) for c in range(r)]
                      for s, g in enumerate(gens)]
                coeffs[j] = tidy(div(determinant(Ct), det))
            out.append(type(gens[0])(self.frame, coeffs))
        red = type(self)(self.frame, out, self.label)
        red._basis = tuple(out)
        return red


class Distribution(_Span):
    kind = "distribution"

    @classmethod
    def full(cls, frame: Frame, label: str = "TXU") -> "Distribution":
        return cls(frame, [frame.coordinate_field(z) for z in frame.coords], label)

    @classmethod
    def zero(cls, frame: Frame, label: str = "0") -> "Distribution":
        return cls(frame, [], label)

    def __add__(self, other: "Distribution") -> "Distribution":
        return span_sum(self, other)

    def pair_brackets(self) -> list:
        b = self.basis
        return [lie_bracket(b[i], b[j]) for i, j in combinations(range(len(b)), 2)]

    def is_involutive(self) -> bool:
        if self.is_full or self.rank <= 1:
            return True
        return self.contains_all(self.pair_brackets())


class Codistribution(_Span):
    kind = "codistribution"


# ---------------------------------------------------------------- operations

def generic_rank(D: _Span) -> int:
    return D.rank


def contains(D: _Span, v) -> bool:
    return D.contains(v)


def is_involutive(D: Distribution) -> bool:
    return D.is_involutive()


def span_sum(*ds: _Span, label: str = "") -> _Span:
    frame = ds[0].frame
    gens = []
    for d in ds:
        gens.extend(d.basis if d._basis is not None else d.gens)
    return type(ds[0])(frame, gens, label)


def bracket_with(f: VectorField, D: Distribution, label: str = "") -> Distribution:
    return Distribution(D.frame, [lie_bracket(f, g) for g in D.basis], label)


def derived_flag(D: Distribution, label: str = "") -> Distribution:
    return Distribution(D.frame, list(D.basis) + D.pair_brackets(), label or _tag(D, "^(1)"))


def involutive_closure(D: Distribution, label: str = "") -> Distribution:
    """Bracket saturation; a full-rank result is returned as the coordinate frame."""
    label = label or _tag(D, "bar")
    frame = D.frame
    cur = list(D.basis)
    checked = 0
    while True:
        if len(cur) == frame.dim:
            return Distribution.full(frame, label)
        new = []
        for i in range(len(cur)):
            for j in range(max(i + 1, checked), len(cur)):
                new.append(lie_bracket(cur[i], cur[j]))
        checked = len(cur)
        if not new:
            break
        v, e = _stack(cur + new)
        picked = greedy_independent(v, e, frame.tau, range(len(cur), len(cur) + len(new)),
                                    fixed=range(len(cur)))
        if not picked:
            break
        cur.extend((cur + new)[i] for i in picked)
    out = Distribution(frame, cur, label)
    out._basis = tuple(cur)
    return out


def annihilator(D: _Span, label: str = "") -> _Span:
    """Forms vanishing on a distribution, or fields killed by a codistribution."""
    frame = D.frame
    n = frame.dim
    gens = D.basis
    target = OneForm if isinstance(D, Distribution) else VectorField
    out_cls = Codistribution if isinstance(D, Distribution) else Distribution
    label = label or _tag(D, "perp")
    if not gens:
        return out_cls(frame, [target(frame, [as_expr(int(i == j)) for i in range(n)])
                               for j in range(n)], label)
    if len(gens) == n:
        return out_cls(frame, [], label)
    M = [list(g.coeffs) for g in gens]
    v, e = _stack(list(gens))
    kern = nullspace(M, v, e, frame.tau, tidy)
    out = out_cls(frame, [target(frame, x) for x in kern], label)
    out._basis = out.gens
    return out


def cauchy_characteristic(D: Distribution, label: str = "") -> Distribution:
    """All c in D with [c, D] in D, as explicit generators."""
    label = label or _tag(D, "C")
    frame = D.frame
    gens = D.basis
    if D.is_full or D.is_involutive():
        return D.named(label)
    forms = annihilator(D).basis
    k = len(gens)
    brackets = {}
    for i, j in combinations(range(k), 2):
        b = lie_bracket(gens[i], gens[j])
        brackets[(i, j)] = b
        brackets[(j, i)] = -b
    rows = []
    for j in range(k):
        for w in forms:
            rows.append([ZERO if i == j else tidy(w.contract(brackets[(i, j)])) for i in range(k)])
    exprs = [x for row in rows for x in row]
    v, e = frame.evaluate(exprs)
    m = len(rows)
    v = v.reshape(-1, m, k)
    e = e.reshape(-1, m, k)
    kern = nullspace(rows, v, e, frame.tau, tidy)
    out = []
    for gamma in kern:
        coeffs = [ZERO] * frame.dim
        for g, vf in zip(gamma, gens):
            if g.is_zero_const:
                continue
            coeffs = [c + g * a for c, a in zip(coeffs, vf.coeffs)]
        out.append(VectorField(frame, [tidy(c) for c in coeffs]))
    res = Distribution(frame, out, label)
    return res.reduced() if res.gens else res


def in_cauchy(D: Distribution, v: VectorField) -> bool:
    """v in D and [v, D] in D, decided by one rank test."""
    return D.contains_all([v] + [lie_bracket(v, g) for g in D.basis])


def _tag(D, suffix: str) -> str:
    if not D.label:
        return ""
    if suffix == "bar":
        return f"closure({D.label})"
    if suffix == "perp":
        return f"{D.label}^perp"
    if suffix == "C":
        return f"C({D.label})"
    return f"{D.label}{suffix}"
