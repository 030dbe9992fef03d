"""One test per acceptance criterion; the terminal summary prints a PASS/FAIL line for each."""
import contextlib
import time

import conftest
import test_decision
import test_liealg
from conftest import CRITERIA, classified, model, sym
from flatd2.decision import FLAT_D2, classify, not_flat_verdict
from flatd2.flatout import (
    derive_ubar1, extract_flat_output, prolongation_oracle, relative_degrees, verify_flat_output,
)
from flatd2.liealg import Codistribution, Distribution, cauchy_characteristic, derived_flag, differential
from flatd2.symexpr import Expr, add, cos, div, mul, sin, sub


@contextlib.contextmanager
def criterion(k, detail):
    try:
        yield
    except BaseException as err:
        CRITERIA[k] = (False, f"{detail}: {type(err).__name__} {err}".strip())
        raise
    CRITERIA[k] = (True, detail)


def fresh(name):
    """Classify without the shared cache, timing the call."""
    t0 = time.perf_counter()
    c = classify(model(name))
    return c, time.perf_counter() - t0


def dspan(m, comps):
    return Codistribution(m.frame, [differential(m.frame, h) for h in comps])


def span_equivalent(m, got, want):
    return dspan(m, got).same_span(dspan(m, want))


def test_criterion_1_vtol():
    with criterion(1, "vtol d=2 via 1,2b,3a,5; flat output (x - eps sin th, z + eps cos th)"):
        m = model("vtol")
        c, dt = fresh("vtol")
        assert c.d == 2 and c.verdict == FLAT_D2 and c.trace.path == ["1", "2b", "3a", "5"]
        assert dt < 10, f"classify took {dt:.1f}s"
        sols = c.trace.alg_within[0]["solutions"]
        assert sorted(map(tuple, sols)) == [("0", "1"), ("1", "0")]
        rejected = [b for b in c.trace.branches if not b.accepted]
        assert len(rejected) == 1 and "+ 2" in rejected[0].reason
        fr = m.frame
        th, eps = sym(m, "theta"), sym(m, "eps")
        dx, dz, dth = (fr.coordinate_form(sym(m, n)) for n in ("x", "z", "theta"))
        want = Codistribution(fr, [dx - dth.scaled(mul(eps, cos(th))), dz - dth.scaled(mul(eps, sin(th)))])
        cand = extract_flat_output(m, c.trace)
        assert cand.complete and dspan(m, cand.components).same_span(want)
        closed = [sub(sym(m, "x"), mul(eps, sin(th))), add(sym(m, "z"), mul(eps, cos(th)))]
        assert span_equivalent(m, cand.components, closed)
        assert verify_flat_output(m, c.trace, cand).accepted


def test_criterion_2_sin():
    with criterion(2, "sin d=2 via 1,2b,3a,5; v_c = u1 d_u1 + u2 d_u2; flat output (x3, x1 - x2 u1/u2)"):
        m = model("sin")
        c, dt = fresh("sin")
        assert c.d == 2 and c.trace.path == ["1", "2b", "3a", "5"]
        assert dt < 5, f"classify took {dt:.1f}s"
        assert len(c.trace.branches) == 2
        u1, u2 = sym(m, "u1"), sym(m, "u2")
        fr = m.frame
        alphas = [b.alpha for b in c.trace.branches]
        assert any(test_decision.proportional(
            tuple(test_decision.parse_expr(a, {s.name: s for s in fr.domain.columns}) for a in al),
            (u1, u2), m) for al in alphas)
        (b,) = c.trace.accepted_branches
        vc = fr.coordinate_field(u1).scaled(u1) + fr.coordinate_field(u2).scaled(u2)
        assert Distribution(fr, [b.vc_field, vc]).rank == 1
        cand = extract_flat_output(m, c.trace)
        want = [sym(m, "x3"), sub(sym(m, "x1"), div(mul(sym(m, "x2"), u1), u2))]
        assert cand.complete and span_equivalent(m, cand.components, want)
        assert verify_flat_output(m, c.trace, want).accepted


def test_criterion_3_product():
    with criterion(3, "u1*u2 d=2 with two branches; flat outputs (x2, x3 - x1 u2) and (x1, x3 - x2 u1)"):
        m = model("product")
        c = classified("product")
        assert c.d == 2 and len(c.trace.accepted_branches) == 2
        x1, x2, x3, u1, u2 = (sym(m, n) for n in ("x1", "x2", "x3", "u1", "u2"))
        wants = [[x2, sub(x3, mul(x1, u2))], [x1, sub(x3, mul(x2, u1))]]
        got = [extract_flat_output(m, c.trace, b.branch_id) for b in c.trace.accepted_branches]
        for want in wants:
            assert any(g.complete and span_equivalent(m, g.components, want) for g in got)


def test_criterion_4_sqrt():
    with criterion(4, "sqrt(u1*u2) not flat with d <= 2; d=1 fails at 2b, d=2 at 3a.I"):
        c = classified("sqrt")
        assert c.d is None and c.verdict == not_flat_verdict(2)
        by = {t.theorem: t for t in c.traces}
        assert by["d1"].failed_item == "2b" and "non-involutive" in by["d1"].reason
        assert by["d2"].failed_item == "3a.I" and "+ 2" in by["d2"].reason


def test_criterion_5_academic():
    with criterion(5, "academic2 d=2 via 1,2b,3b,4b,5; alpha (1,-1); flat output (x1+x2, x3+x4)"):
        m = model("academic2")
        c = classified("academic2")
        assert c.d == 2 and c.trace.path == ["1", "2b", "3b", "4b", "5"]
        (sol,) = c.trace.alg_within[0]["solutions"]
        assert int(sol[0]) == -int(sol[1]) != 0
        fr = m.frame
        f = {n: fr.coordinate_field(sym(m, n)) for n in ("u1", "u2", "x1", "x2", "x3", "x4")}
        F2 = Distribution(fr, [f["u1"], f["u2"], f["x1"] - f["x2"], f["x3"] - f["x4"]])
        assert c.trace.distributions["F_2"].same_span(F2)
        cand = extract_flat_output(m, c.trace)
        want = [add(sym(m, "x1"), sym(m, "x2")), add(sym(m, "x3"), sym(m, "x4"))]
        assert cand.complete and span_equivalent(m, cand.components, want)


def test_criterion_6_coin():
    with criterion(6, "coin d=2 via 1,2aB,4a.II,5; psi = theta; flat output (theta, R phi - x cos th - y sin th)"):
        m = model("coin")
        c = classified("coin")
        assert c.d == 2 and c.trace.path == ["1", "2aB", "4a.II", "5"]
        fr = m.frame
        th, R = sym(m, "theta"), sym(m, "R")
        D1 = c.traces[-1].distributions["D_1"]
        rolling = (fr.coordinate_field(sym(m, "x")).scaled(mul(R, cos(th)))
                   + fr.coordinate_field(sym(m, "y")).scaled(mul(R, sin(th)))
                   + fr.coordinate_field(sym(m, "phi")))
        C = cauchy_characteristic(derived_flag(D1))
        assert C.same_span(Distribution(fr, [fr.coordinate_field(sym(m, "u1")),
                                             fr.coordinate_field(sym(m, "u2")), rolling]))
        cand = extract_flat_output(m, c.trace)
        (comp,) = cand.completions.values()
        assert comp.method == "psi" and comp.psi == th
        want = [th, sub(mul(R, sym(m, "phi")), add(mul(sym(m, "x"), cos(th)), mul(sym(m, "y"), sin(th))))]
        assert cand.complete and span_equivalent(m, cand.components, want)
        assert verify_flat_output(m, c.trace, cand).accepted


def test_criterion_7_relative_degrees():
    checked = []
    with criterion(7, "relative degrees match d on every closed-form candidate"):
        for name in ("vtol", "sin", "product", "academic2", "coin"):
            m, c = model(name), classified(name)
            for b in c.trace.accepted_branches:
                cand = extract_flat_output(m, c.trace, b.branch_id)
                if not cand.complete:
                    continue
                rep = relative_degrees(m, cand.components)
                assert rep.d == c.d, f"{name}/{b.branch_id}: k={rep.k}"
                checked.append(name)
        assert len(checked) == 6


def _oracle(m, ub, d):
    t0 = time.perf_counter()
    res = prolongation_oracle(m, ub, d)
    dt = time.perf_counter() - t0
    assert dt < 30, f"oracle took {dt:.1f}s"
    return res


def test_criterion_8_oracle():
    with criterion(8, "prolonged sin and academic2 are SFL; chain stays SFL"):
        for name in ("sin", "academic2"):
            m, c = model(name), classified(name)
            ubs = [derive_ubar1(m, b.vc_field) for b in c.trace.accepted_branches]
            assert ubs and all(isinstance(u, Expr) for u in ubs)
            for ub in ubs:
                assert _oracle(m, ub, 2).sfl, name
        m = model("chain")
        assert _oracle(m, sym(m, "u1"), 1).sfl


def test_criterion_9_properties():
    with criterion(9, "property suites at 200 cases each plus 30 input transformations"):
        test_liealg.test_bracket_antisymmetry()
        test_liealg.test_jacobi_identity()
        test_liealg.test_closure_idempotent_and_involutive()
        test_liealg.test_cauchy_characteristic_property()
        test_liealg.test_annihilator_rank_complement()
        test_decision.test_alg_within_at_most_two()
        for name, k in test_decision.TRANSFORM_CASES:
            test_decision.test_input_transformation_invariance(conftest.model, conftest.classified, name, k)
        assert len(test_decision.TRANSFORM_CASES) == 30
        assert test_liealg.PROPS.max_examples >= 200 and test_decision.PROPS.max_examples >= 200
