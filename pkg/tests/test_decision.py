import random

import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from conftest import sym
from flatd2.decision import (
    FLAT_D1, FLAT_D2, LEGAL_PATHS, SFL, Assumption, AutonomousSubsystemError, ModelError, SystemModel,
    bracket_sequence, build_bracket_sequence, check_d1, classify,
    not_flat_verdict, solve_alg_within, static_feedback_linearizable,
)
from flatd2.liealg import DegeneracyError, Distribution
from flatd2.modelio import parse_model
from flatd2.symexpr import Const, Symbol, add, div, is_zero, mul, parse_expr, substitute, sub, tan

CORPUS_SIX = ("vtol", "sin", "product", "sqrt", "academic2", "coin")
PROPS = settings(max_examples=200, derandomize=True, deadline=None,
                 suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])

CHAINED = """model chained
states x1 x2 x3
inputs u1 u2
dot x1 = u1
dot x2 = u2
dot x3 = x2*u1
"""


def proportional(pair, want, m):
    """(a1, a2) and (b1, b2) define the same direction."""
    a1, a2 = pair
    b1, b2 = want
    return bool(is_zero(sub(mul(a1, b2), mul(a2, b1)), m.domain))


def test_k1_values(load):
    assert build_bracket_sequence(load("vtol"))[1] == 2
    assert build_bracket_sequence(load("sin"))[1] == 1
    seq = bracket_sequence(load("chain"))
    assert seq.k1 is None and seq.distributions[-1].is_full


def test_autonomous_subsystem_detected():
    m = parse_model("model aut\nstates x1 x2 x3\ninputs u1 u2\ndot x1 = u1\ndot x2 = u2\ndot x3 = x3\n")
    with pytest.raises(AutonomousSubsystemError):
        build_bracket_sequence(m)


def test_sfl_examples(load, cls):
    t = static_feedback_linearizable(load("chain"))
    assert t.accepted and t.verdict == SFL
    assert not static_feedback_linearizable(load("vtol")).accepted
    for name in CORPUS_SIX:
        assert cls(name).traces[0].theorem == "sfl" and not cls(name).traces[0].accepted


def test_alg_within_examples(load, cls):
    sols = cls("vtol").traces[-1].alg_within[0]["solutions"]
    assert sorted(map(tuple, sols)) == [("0", "1"), ("1", "0")]

    s = load("sin")
    t = cls("sin").traces[-1]
    alphas = [b.alpha for b in t.branches]
    assert len(alphas) == 2
    u1, u2 = sym(s, "u1"), sym(s, "u2")
    table = {x.name: x for x in s.frame.domain.columns}
    parsed = [tuple(parse_expr(a, table) for a in al) for al in alphas]
    r = div(u1, u2)
    second = (sub(mul(u1, tan(r)), mul(2, u2)), mul(u2, tan(r)))
    assert any(proportional(p, (u1, u2), s) for p in parsed)
    assert any(proportional(p, second, s) for p in parsed)

    a = load("academic2")
    sols = cls("academic2").traces[-1].alg_within[0]["solutions"]
    assert len(sols) == 1
    one = tuple(Const(int(v)) for v in sols[0])
    assert proportional(one, (Const(1), Const(-1)), a)


def test_check_d1_examples(load):
    assert not check_d1(load("vtol")).accepted
    t = check_d1(load("sqrt"))
    assert not t.accepted and t.failed_item == "2b" and "non-involutive" in t.reason
    t = check_d1(parse_model(CHAINED))
    assert t.accepted and t.verdict == FLAT_D1


def test_check_d2_examples(cls):
    t = cls("vtol").traces[-1]
    assert t.accepted and t.path == ["1", "2b", "3a", "5"]
    b1, b2 = t.branches
    assert not b1.accepted and b1.failed_item == "3a.II" and "+ 2" in b1.reason
    assert b2.accepted
    assert t.distributions["F_4,2"].is_full
    c = cls("coin").traces[-1]
    assert c.accepted and c.path == ["1", "2aB", "4a.II", "5"]
    assert c.distributions["closure(E_2)"].is_full
    q = cls("sqrt").traces[-1]
    assert not q.accepted and q.failed_item == "3a.I" and "+ 2" in q.reason


def test_classify_verdicts(cls):
    assert cls("vtol").d == 2 and cls("vtol").verdict == FLAT_D2
    p = cls("product")
    assert p.d == 2 and len(p.trace.accepted_branches) == 2
    q = cls("sqrt")
    assert q.d is None and q.verdict == not_flat_verdict(2) == "flat only with d ≥ 3, or not flat"
    assert cls("chain").d == 0
    assert classify(parse_model(CHAINED)).d == 1


def test_classify_respects_max_d(load):
    c = classify(load("vtol"), dmax=1)
    assert c.d is None and c.verdict == not_flat_verdict(1)
    with pytest.raises(ValueError):
        classify(load("vtol"), dmax=3)


@pytest.mark.parametrize("name", CORPUS_SIX + ("chain",))
def test_traces_replay_and_paths_are_legal(cls, name):
    for t in cls(name).traces:
        assert t.replay() == []
        assert t.path_is_legal()
        if t.accepted:
            assert tuple(t.path) in LEGAL_PATHS[t.theorem]


def test_ordering_soundness(cls):
    for name in CORPUS_SIX + ("chain",):
        c = cls(name)
        accepted = [t.theorem for t in c.traces if t.accepted]
        assert len(accepted) <= 1
        if accepted:
            assert c.traces[-1].accepted


def test_sampling_parameters_travel_with_the_model(load):
    m = load("vtol").with_sampling(seed=11, samples=30)
    assert (m.seed, m.samples) == (11, 30)
    assert classify(m).d == 2


def test_rank_one_input_rejected():
    with pytest.raises(ModelError):
        parse_model("model bad\nstates x1 x2\ninputs u1 u2\ndot x1 = u1\ndot x2 = x1*u1\n")


# ---------------------------------------------------------------- algWithin bound

def _random_system(draw_terms, n):
    xs = [Symbol(f"x{i + 1}") for i in range(n)]
    us = [Symbol("u1"), Symbol("u2")]
    pool = xs + us
    dyn = []
    for terms in draw_terms:
        out = []
        for c, idx in terms:
            out.append(mul(Const(c), *(pool[i % len(pool)] for i in idx)))
        dyn.append(add(*out))
    dyn[0] = add(dyn[0], us[0])
    dyn[-1] = add(dyn[-1], us[1])
    return SystemModel("random", xs, us, dyn, check=False)


# inputs sit at the end of the pool; bias toward them so u-curvature is common
index = st.one_of(st.integers(0, 6), st.sampled_from([-1, -2]))
term = st.tuples(st.integers(-2, 2).filter(bool), st.lists(index, min_size=1, max_size=3))


@PROPS
@given(st.integers(2, 5).flatmap(lambda n: st.lists(st.lists(term, max_size=3), min_size=n, max_size=n)),
       st.booleans())
def test_alg_within_at_most_two(rows, against_d0):
    m = _random_system(rows, len(rows))
    fr = m.frame
    try:
        D = bracket_sequence(m).distributions
    except (DegeneracyError, AutonomousSubsystemError):
        assume(False)
    v1, v2 = fr.coordinate_field(m.inputs[0]), fr.coordinate_field(m.inputs[1])
    target = D[0] if against_d0 or len(D) < 2 else D[1]
    try:
        rep = solve_alg_within(m, Distribution.zero(fr), v1, v2, target)
    except DegeneracyError:
        assume(False)
    assert len(rep.solutions) <= 2
    for s in rep.solutions:
        assert s.normalization in ("a2=1", "(1,0)")


# ---------------------------------------------------------------- input transformations

def _transform(m, rng):
    """u1 = a*p1 + b*p2 + c*p2^2, u2 = d*p2 (optionally swapped); det = a*d != 0."""
    p1, p2 = Symbol("p1"), Symbol("p2")
    a, d = rng.choice([-2, -1, 1, 2, 3]), rng.choice([-2, -1, 1, 2])
    b, c = rng.choice([-1, 0, 1, 2]), rng.choice([-1, 0, 1])
    e1 = add(mul(a, p1), mul(b, p2), mul(c, p2, p2))
    e2 = mul(d, p2)
    if rng.random() < 0.5:
        e1, e2 = e2, e1
    u1, u2 = m.inputs
    sub_map = {u1: e1, u2: e2}
    dyn = [substitute(f, sub_map) for f in m.dynamics]
    assumptions = [Assumption(substitute(x.expr, sub_map), x.relation) for x in m.assumptions]
    return SystemModel(m.name + "~", m.states, (p1, p2), dyn, m.constants, assumptions,
                       m.seed, m.samples, m.tau)


TRANSFORM_CASES = [(name, k) for name in CORPUS_SIX for k in range(5)]


@pytest.mark.parametrize("name,k", TRANSFORM_CASES)
def test_input_transformation_invariance(load, cls, name, k):
    m = load(name)
    rng = random.Random(1000 * CORPUS_SIX.index(name) + k)
    mt = _transform(m, rng)
    base, moved = cls(name), classify(mt)
    assert moved.d == base.d and moved.verdict == base.verdict
    r0 = [D.rank for D in bracket_sequence(m).distributions]
    r1 = [D.rank for D in bracket_sequence(mt).distributions]
    assert r0 == r1
