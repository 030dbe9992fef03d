"""Best-effort simplification.

Nothing downstream relies on these rewrites for correctness; zero decisions
are always made by :func:`flatd2.symexpr.sampling.is_zero`.
"""
from __future__ import annotations

from .expr import ADD, FUNC, MUL, POW, Expr, _split_coeff, add, func, mul, postorder, pow_, rebuild

_EXPAND_LIMIT = 400


def _trig_collapse_sum(e: Expr) -> Expr:
    # c*M*sin(a)^2 + c*M*cos(a)^2 -> c*M
    terms = list(e.args)
    changed = True
    while changed:
        changed = False
        decomposed = []
        for t in terms:
            c, rest = _split_coeff(t)
            fs = rest.args if rest.kind == MUL else (rest,)
            decomposed.append((c, fs))
        index = {}
        for i, (c, fs) in enumerate(decomposed):
            index.setdefault((c, frozenset(fs)), []).append(i)
        for i, (c, fs) in enumerate(decomposed):
            for j, f in enumerate(fs):
                if f.kind == POW and f.payload == 2 and f.args[0].kind == FUNC and f.args[0].payload == "sin":
                    partner = pow_(func("cos", f.args[0].args[0]), 2)
                    others = fs[:j] + fs[j + 1:]
                    key = (c, frozenset(others + (partner,)))
                    hits = [k for k in index.get(key, []) if k != i]
                    if hits:
                        k = hits[0]
                        new = mul(c, *others)
                        terms = [t for n, t in enumerate(terms) if n not in (i, k)] + [new]
                        changed = True
                        break
            if changed:
                break
    return add(*terms)


def trig_collapse(e: Expr) -> Expr:
    memo = {}
    for n in postorder([e]):
        if not n.args:
            memo[n] = n
            continue
        new = rebuild(n, tuple(memo[a] for a in n.args))
        if new.kind == ADD:
            new = _trig_collapse_sum(new)
        memo[n] = new
    return memo[e]


def expand(e: Expr, limit: int = _EXPAND_LIMIT) -> Expr:
    """Distribute products over sums (bounded); returns ``e`` unchanged on blow-up."""
    memo = {}
    for n in postorder([e]):
        if not n.args:
            memo[n] = n
            continue
        args = tuple(memo[a] for a in n.args)
        if n.kind == MUL:
            new = _distribute(n.payload, args, limit)
        elif n.kind == POW and n.payload > 1 and args[0].kind == ADD:
            new = _distribute(1, (args[0],) * n.payload, limit)
        else:
            new = rebuild(n, args)
        if new is None:
            return e
        memo[n] = new
    return memo[e]


def _distribute(coef, factors, limit):
    terms = [mul(coef)]
    for f in factors:
        if f.kind == POW and f.payload > 1 and f.args[0].kind == ADD:
            parts = [f.args[0]] * f.payload
        else:
            parts = [f]
        for p in parts:
            summands = p.args if p.kind == ADD else (p,)
            if len(terms) * len(summands) > limit:
                return None
            terms = [mul(t, s) for t in terms for s in summands]
    return add(*terms)


def simplify(e: Expr) -> Expr:
    """Constant folding, like-term collection, power merging and sin^2+cos^2=1.

    Returns the smallest of a few equivalent candidates.
    """
    candidates = [e, trig_collapse(e)]
    ex = expand(e)
    if ex is not e:
        candidates.append(ex)
        candidates.append(trig_collapse(ex))
    return min(candidates, key=lambda c: (c.size, candidates.index(c)))
