import io
import json
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from flatd2 import corpus
from flatd2.decision import ModelError, classify
from flatd2.modelio import (
    SCHEMA, ConstantDecl, ModelDocument, Report, ReportError, build_report, parse_document,
    parse_model, render_text, run_cli,
)
from flatd2.symexpr import Const, ParseError, Symbol, add, cos, div, mul, pow_, sin, to_text

SIN_TEXT = corpus.text("sin")


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_cli(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


# ---------------------------------------------------------------- model files

def test_parse_examples():
    doc = parse_document(SIN_TEXT)
    assert doc.name == "sin" and doc.states == ["x1", "x2", "x3"] and doc.inputs == ["u1", "u2"]
    assert doc.dynamics["x3"] == "sin(u1/u2)"
    assert doc.assumptions == [("u2", "!=")]
    m = parse_model(SIN_TEXT)
    assert [s.name for s in m.states] == ["x1", "x2", "x3"]

    v = parse_document(corpus.text("vtol"))
    assert [c.name for c in v.constants] == ["eps"]

    doc = parse_document("model k\nstates a b\ninputs p q\nconstant g = 981/100\nconstant L\n"
                         "range L 1 3\ndot a = p\ndot b = g*q + L*a  # trailing comment\n")
    assert doc.constants == [ConstantDecl("g", Fraction(981, 100)), ConstantDecl("L", None, Fraction(1), Fraction(3))]
    assert doc.pinned == {"g": "981/100"}


@pytest.mark.parametrize("text,line,col", [
    ("model m\nstates x\ninputs u1 u2\ndot x = u1 + * u2\n", 4, 14),
    ("model m\nstates x\ninputs u1 u2\nbogus x\n", 4, 1),
    ("model m\nstates x x\ninputs u1 u2\n", 2, 10),
    ("model m\nstates x\ninputs u1 u2\ndot y = u1\n", 4, 5),
    ("model m\nstates x\ninputs u1 u2\nconstant c = abc\ndot x = u1\n", 4, 10),
])
def test_parse_errors_carry_position(text, line, col):
    with pytest.raises(ParseError) as err:
        parse_document(text)
    assert err.value.line == line
    assert err.value.column >= col


def test_model_errors():
    with pytest.raises(ModelError):
        parse_document("model m\nstates x\ninputs u1\ndot x = u1\n")
    with pytest.raises(ModelError):
        parse_document("model m\nstates x y\ninputs u1 u2\ndot x = u1\n")
    # the inputs enter only through u1 + u2: rank one
    with pytest.raises(ModelError):
        parse_model("model m\nstates x y\ninputs u1 u2\ndot x = u1 + u2\ndot y = x*(u1 + u2)\n")


@pytest.mark.parametrize("name", corpus.NAMES)
def test_corpus_text_roundtrip(name):
    doc = parse_document(corpus.text(name))
    again = parse_document(doc.to_text())
    assert again == doc
    assert again.to_text() == doc.to_text()


STATES = ["x1", "x2", "x3", "th"]
INPUTS = ["u1", "u2"]
CONSTS = ["k", "g"]


def _exprs(names):
    leaf = st.one_of(st.sampled_from([Symbol(n) for n in names]), st.integers(-4, 4).map(Const))

    def grow(ch):
        return st.one_of(
            st.tuples(ch, ch).map(lambda p: add(*p)),
            st.tuples(ch, ch).map(lambda p: mul(*p)),
            ch.map(sin), ch.map(cos),
            st.tuples(ch, st.integers(2, 3)).map(lambda p: pow_(*p)),
            st.tuples(ch, ch).map(lambda p: div(p[0], add(2, mul(p[1], p[1])))),
        )

    return st.recursive(leaf, grow, max_leaves=6).map(to_text)


fractions = st.fractions(min_value=-5, max_value=5, max_denominator=8)


@st.composite
def documents(draw):
    n = draw(st.integers(1, 4))
    states = STATES[:n]
    consts = CONSTS[:draw(st.integers(0, 2))]
    decls = []
    for c in consts:
        if draw(st.booleans()):
            decls.append(ConstantDecl(c, draw(fractions)))
        else:
            lo = draw(st.fractions(min_value=Fraction(1, 4), max_value=2, max_denominator=8))
            decls.append(ConstantDecl(c, None, lo, lo + draw(st.fractions(0, 3, max_denominator=4))))
    names = states + INPUTS + consts
    dyn = {s: draw(_exprs(names)) for s in states}
    assume = draw(st.lists(st.tuples(_exprs(names), st.sampled_from(["!=", ">"])), max_size=2))
    return ModelDocument(draw(st.sampled_from(["m", "robot_2", "cart"])), states, list(INPUTS), decls, dyn, assume)


@settings(max_examples=200, derandomize=True, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(documents())
def test_document_roundtrip(doc):
    text = doc.to_text()
    back = parse_document(text)
    assert back == doc
    assert back.to_text() == text


# ---------------------------------------------------------------- reports

def _report(name, seed=0):
    m = corpus.load(name, seed=seed)
    return build_report(m, classify(m))


def test_report_is_byte_stable():
    a, b = _report("vtol").dumps(), _report("vtol").dumps()
    assert a == b and a.endswith("\n")
    data = json.loads(a)
    assert data["schema"] == SCHEMA and data["d"] == 2 and data["path"] == ["1", "2b", "3a", "5"]
    assert data["pinned"] == {}


def test_report_json_roundtrip():
    r = _report("sin")
    back = Report.loads(r.dumps())
    assert back == r
    assert back.dumps() == r.dumps()
    with pytest.raises(ReportError):
        Report.from_json(dict(r.to_json(), schema="other/0"))
    with pytest.raises(ReportError):
        Report.from_json(dict(r.to_json(), unknown_field=1))


def test_render_text_mentions_trace():
    txt = render_text(_report("sqrt"))
    assert "rejected at 3a.I" in txt and "seed=0" in txt
    txt = render_text(_report("coin"))
    assert "path 1,2aB,4a.II,5" in txt


# ---------------------------------------------------------------- command line

def test_cli_check_and_json(tmp_path):
    code, out, _ = cli("check", "vtol")
    assert code == 0 and out.startswith("model vtol: flat, d=2\npath 1,2b,3a,5\n")
    target = tmp_path / "r.json"
    code, out, _ = cli("check", "sin.model", "--json", str(target))
    assert code == 0 and out
    assert json.loads(target.read_text())["model"] == "sin"
    code, out, _ = cli("check", "academic2", "--json", "-")
    assert code == 0 and json.loads(out)["d"] == 2


def test_cli_model_file(tmp_path):
    f = tmp_path / "chained.model"
    f.write_text("model chained\nstates x1 x2 x3\ninputs u1 u2\ndot x1 = u1\ndot x2 = u2\ndot x3 = x2*u1\n")
    code, out, _ = cli("check", str(f), "--json", "-")
    assert code == 0 and json.loads(out)["d"] == 1


def test_cli_exit_codes(tmp_path):
    assert cli("check", "no_such_model")[0] == 1
    assert cli("check")[0] == 1
    assert cli("check", "vtol", "--max-d", "5")[0] == 1
    bad = tmp_path / "bad.model"
    bad.write_text("model bad\nstates x\ninputs u1 u2\ndot x = u1 + * u2\n")
    code, _, err = cli("check", str(bad))
    assert code == 1 and "4:" in err
    empty = tmp_path / "empty.model"
    empty.write_text("model e\nstates x1 x2\ninputs u1 u2\ndot x1 = u1\ndot x2 = u2\nassume -x1^2 - 1 > 0\n")
    code, _, err = cli("check", str(empty))
    assert code == 2 and "degenerate" in err


def test_cli_corpus():
    code, out, _ = cli("corpus")
    assert code == 0
    assert [line.split("\t")[0] for line in out.splitlines()] == list(corpus.NAMES)


def test_cli_seed_env(monkeypatch):
    monkeypatch.setenv("FLATD2_SEED", "17")
    code, out, _ = cli("check", "sin", "--json", "-")
    assert code == 0 and json.loads(out)["seed"] == 17
    code, out, _ = cli("check", "sin", "--seed", "3", "--json", "-")
    assert json.loads(out)["seed"] == 3
    monkeypatch.setenv("FLATD2_SEED", "x")
    assert cli("check", "sin")[0] == 1


def test_cli_flat_output():
    code, out, _ = cli("flat-output", "coin", "--json", "-")
    assert code == 0
    data = json.loads(out)
    (fo,) = data["flat_outputs"]
    assert fo["components"] == ["theta", "cos(theta)*x + sin(theta)*y - R*phi"]
    assert fo["check"]["accepted"]
    code, out, _ = cli("flat-output", "sin", "--json", "-")
    data = json.loads(out)
    assert data["oracle"] and all(o["static_feedback_linearizable"] for o in data["oracle"])


def test_cli_oracle():
    code, out, _ = cli("oracle", "sin", "--input-expr", "u1/u2", "--d", "2")
    assert code == 0 and "-> SFL" in out
    code, out, _ = cli("oracle", "sin", "--input-expr", "x1", "--d", "2")
    assert code == 0 and out.startswith("rejected")
    assert cli("oracle", "sin", "--input-expr", "u1 +", "--d", "2")[0] == 1
    assert cli("oracle", "sin", "--input-expr", "u1", "--d", "3")[0] == 1


@pytest.mark.parametrize("name", corpus.NAMES)
def test_corpus_classifies_without_degeneracy(name):
    code, out, err = cli("check", name, "--json", "-")
    assert code == 0, err
    assert json.loads(out)["model"] == name
