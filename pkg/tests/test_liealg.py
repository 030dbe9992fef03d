import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from conftest import sym
from flatd2.decision import bracket_sequence
from flatd2.liealg import (
    DegeneracyError, Distribution, Frame, VectorField, ad_iterate, annihilator,
    bracket_with, cauchy_characteristic, contains, derived_flag, generic_rank, involutive_closure,
    is_involutive, lie_bracket, span_sum,
)
from flatd2.symexpr import ZERO, Const, Domain, Symbol, add, cos, mul, neg, sin

PROPS = settings(max_examples=200, derandomize=True, deadline=None,
                 suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])


def field(frame, *coeffs):
    return VectorField(frame, list(coeffs))


def span(m, *fields, label=""):
    return Distribution(m.frame, list(fields), label)


def same_field_up_to_scale(D, v):
    return D.contains(v) and Distribution(D.frame, [v]).rank == 1


# ---------------------------------------------------------------- examples

def test_vtol_bracket_examples(load):
    m = load("vtol")
    fr = m.frame
    th = sym(m, "theta")
    b = lie_bracket(fr.coordinate_field(sym(m, "u1")), m.f)
    want = fr.coordinate_field(sym(m, "vx")).scaled(neg(sin(th))) + fr.coordinate_field(sym(m, "vz")).scaled(cos(th))
    assert (b - want).is_zero()
    v = fr.coordinate_field(sym(m, "u2")).scaled(sin(th))
    assert lie_bracket(v, v).is_zero()


def test_product_bracket_example(load):
    m = load("product")
    fr = m.frame
    b = lie_bracket(fr.coordinate_field(sym(m, "u1")), m.f)
    want = fr.coordinate_field(sym(m, "x1")) + fr.coordinate_field(sym(m, "x3")).scaled(sym(m, "u2"))
    assert (b - want).is_zero()


def test_ad_iterate(load):
    m = load("vtol")
    fr = m.frame
    du2 = fr.coordinate_field(sym(m, "u2"))
    assert ad_iterate(m.f, du2, 0) == du2
    assert (ad_iterate(m.f, du2, 1) - lie_bracket(m.f, du2)).is_zero()
    D2 = bracket_sequence(m).distributions[2]
    assert D2.contains(ad_iterate(m.f, du2, 2))
    with pytest.raises(ValueError):
        ad_iterate(m.f, du2, -1)


def test_vtol_ranks_and_involutivity(load):
    m = load("vtol")
    D = bracket_sequence(m).distributions
    assert [generic_rank(d) for d in D[:3]] == [2, 4, 6]
    assert is_involutive(D[0]) and is_involutive(D[1]) and not is_involutive(D[2])
    assert contains(D[0], m.frame.coordinate_field(sym(m, "u1")))
    assert contains(D[0], VectorField(m.frame, [ZERO] * m.frame.dim))
    # cross term 2*a1*a2*(cos th d_vx + sin th d_vz) is outside D_2
    th = sym(m, "theta")
    cross = m.frame.coordinate_field(sym(m, "vx")).scaled(cos(th)) + m.frame.coordinate_field(sym(m, "vz")).scaled(sin(th))
    assert not contains(D[2], cross)
    assert cauchy_characteristic(D[2]).same_span(D[0])
    assert (D[0] + bracket_with(m.f, D[0])).same_span(D[1])


def test_sin_closure_example(cls, load):
    m = load("sin")
    E1 = cls("sin").traces[-1].distributions["E_1,1"]
    fr = m.frame
    want = span(m, *(fr.coordinate_field(sym(m, n)) for n in ("u1", "u2", "x1", "x2")))
    assert involutive_closure(E1).same_span(want)


def test_coin_examples(load):
    m = load("coin")
    fr = m.frame
    th, R = sym(m, "theta"), sym(m, "R")
    D1 = bracket_sequence(m).distributions[1]
    assert involutive_closure(D1).is_full
    d1 = derived_flag(D1)
    extra = fr.coordinate_field(sym(m, "x")).scaled(sin(th)) + fr.coordinate_field(sym(m, "y")).scaled(neg(cos(th)))
    assert d1.same_span(D1 + span(m, extra))
    rolling = (fr.coordinate_field(sym(m, "x")).scaled(mul(R, cos(th)))
               + fr.coordinate_field(sym(m, "y")).scaled(mul(R, sin(th)))
               + fr.coordinate_field(sym(m, "phi")))
    C = cauchy_characteristic(d1)
    assert C.same_span(span(m, fr.coordinate_field(sym(m, "u1")), fr.coordinate_field(sym(m, "u2")), rolling))
    assert generic_rank(derived_flag(D1)) <= generic_rank(involutive_closure(D1))


def test_annihilator_examples(cls, load):
    m = load("vtol")
    fr = m.frame
    th, eps = sym(m, "theta"), sym(m, "eps")
    F3 = cls("vtol").traces[-1].distributions["F_3,2"]
    dx, dz, dth = (fr.coordinate_form(sym(m, n)) for n in ("x", "z", "theta"))
    want = [dx - dth.scaled(mul(eps, cos(th))), dz - dth.scaled(mul(eps, sin(th)))]
    P = annihilator(F3)
    assert P.rank == 2 and P.contains_all(want)
    assert annihilator(Distribution.full(fr)).rank == 0

    a = load("academic2")
    F2 = cls("academic2").traces[-1].distributions["F_2"]
    fa = a.frame
    d = {n: fa.coordinate_form(sym(a, n)) for n in ("x1", "x2", "x3", "x4")}
    P = annihilator(F2)
    assert P.rank == 2 and P.contains_all([d["x1"] + d["x2"], d["x3"] + d["x4"]])


def test_sum_and_empty(load):
    m = load("vtol")
    D0 = bracket_sequence(m).distributions[0]
    assert span_sum(D0, D0).rank == D0.rank
    assert bracket_with(m.f, Distribution.zero(m.frame)).rank == 0


def test_involutive_is_its_own_closure_flag_and_cauchy(load):
    m = load("vtol")
    D1 = bracket_sequence(m).distributions[1]
    assert involutive_closure(D1).same_span(D1)
    assert derived_flag(D1).same_span(D1)
    assert cauchy_characteristic(D1).same_span(D1)


# ---------------------------------------------------------------- properties

Z = tuple(Symbol(n) for n in ("z1", "z2", "z3"))
W = tuple(Symbol(n) for n in ("w1", "w2"))
FRAME = Frame(Z, W, Domain(Z + W))
COORDS = Z + W


def _poly():
    mono = st.tuples(st.integers(-2, 2), st.sampled_from(COORDS + (None,)), st.sampled_from(COORDS + (None,)))

    def build(terms):
        out = []
        for c, a, b in terms:
            f = [Const(c)] + [s for s in (a, b) if s is not None]
            out.append(mul(*f))
        return add(*out)

    return st.lists(mono, min_size=0, max_size=3).map(build)


def _trig():
    return st.one_of(_poly(), st.tuples(st.sampled_from(COORDS), st.integers(1, 2)).map(lambda p: mul(p[1], sin(p[0]))))


vector_fields = st.lists(_trig(), min_size=5, max_size=5).map(lambda cs: VectorField(FRAME, cs))


@PROPS
@given(vector_fields, vector_fields)
def test_bracket_antisymmetry(v, w):
    assert (lie_bracket(v, w) + lie_bracket(w, v)).is_zero()
    assert lie_bracket(v, v).is_zero()


@PROPS
@given(vector_fields, vector_fields, vector_fields)
def test_jacobi_identity(u, v, w):
    j = lie_bracket(u, lie_bracket(v, w)) + lie_bracket(v, lie_bracket(w, u)) + lie_bracket(w, lie_bracket(u, v))
    assert j.is_zero()


def _distribution(fields):
    D = Distribution(FRAME, fields)
    try:
        D.rank
    except DegeneracyError:
        assume(False)
    return D


@PROPS
@given(st.lists(vector_fields, min_size=1, max_size=3))
def test_closure_idempotent_and_involutive(fields):
    D = _distribution(fields)
    try:
        C = involutive_closure(D)
        C2 = involutive_closure(C)
    except DegeneracyError:
        assume(False)
    assert D.issubset(C)
    assert C.is_involutive()
    assert C2.same_span(C)


@PROPS
@given(st.lists(vector_fields, min_size=1, max_size=3))
def test_cauchy_characteristic_property(fields):
    D = _distribution(fields)
    try:
        C = cauchy_characteristic(D)
    except DegeneracyError:
        assume(False)
    assert C.issubset(D)
    for c in C.basis:
        for d in D.basis:
            assert D.contains(lie_bracket(c, d))


@PROPS
@given(st.lists(vector_fields, min_size=0, max_size=4))
def test_annihilator_rank_complement(fields):
    D = _distribution(fields)
    P = annihilator(D)
    assert P.rank + D.rank == FRAME.dim
    for w in P.basis:
        for g in D.basis:
            assert FRAME.is_zero(w.contract(g))
