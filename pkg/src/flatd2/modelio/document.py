"""Line-oriented model files.

Grammar (one declaration per line, ``#`` starts a comment)::

    model   NAME
    states  NAME NAME ...
    inputs  NAME NAME
    constant NAME [= VALUE]
    range   NAME LOW HIGH
    dot     STATE = EXPR
    assume  EXPR != 0
    assume  EXPR > 0

Values and bounds are exact decimals or fractions (``0.5``, ``1/2``).
Expressions use ``+ - * / ^``, integer exponents and the functions
sin, cos, tan, arcsin, sqrt, exp, log.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from ..decision import Assumption, ModelError, SystemModel
from ..symexpr import DEFAULT_SAMPLES, DEFAULT_SEED, TAU_ZERO, ConstantSpec, ParseError, Symbol, parse_expr

_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*$")
_KEYWORDS = {"model", "states", "inputs", "constant", "range", "dot", "assume"}


@dataclass
class ConstantDecl:
    name: str
    value: Optional[Fraction] = None
    low: Fraction = Fraction(1, 2)
    high: Fraction = Fraction(2)


@dataclass
class ModelDocument:
    name: str = ""
    states: list = field(default_factory=list)
    inputs: list = field(default_factory=list)
    constants: list = field(default_factory=list)
    dynamics: dict = field(default_factory=dict)  # state -> expression text
    assumptions: list = field(default_factory=list)  # (expression text, "!=" | ">")
    lines: dict = field(default_factory=dict, compare=False, repr=False)

    def to_text(self) -> str:
        out = [f"model {self.name}", "states " + " ".join(self.states), "inputs " + " ".join(self.inputs)]
        for c in self.constants:
            if c.value is not None:
                out.append(f"constant {c.name} = {_frac_text(c.value)}")
            else:
                out.append(f"constant {c.name}")
                if (c.low, c.high) != (Fraction(1, 2), Fraction(2)):
                    out.append(f"range {c.name} {_frac_text(c.low)} {_frac_text(c.high)}")
        for s in self.states:
            out.append(f"dot {s} = {self.dynamics[s]}")
        for text, rel in self.assumptions:
            out.append(f"assume {text} {rel} 0")
        return "\n".join(out) + "\n"

    def symbols(self) -> dict:
        table = {n: Symbol(n) for n in self.states + self.inputs}
        table.update({c.name: Symbol(c.name, constant=True) for c in self.constants})
        return table

    def build(self, seed: int = DEFAULT_SEED, samples: int = DEFAULT_SAMPLES, tau: float = TAU_ZERO) -> SystemModel:
        table = self.symbols()

        def expr(text, key):
            line, col = self.lines.get(key, (1, 1))
            return parse_expr(text, table, line, col)

        missing = [s for s in self.states if s not in self.dynamics]
        if missing:
            raise ModelError(f"no dynamics for states {missing}")
        dyn = [expr(self.dynamics[s], ("dot", s)) for s in self.states]
        assumptions = [Assumption(expr(t, ("assume", i)), rel) for i, (t, rel) in enumerate(self.assumptions)]
        consts = [ConstantSpec(table[c.name], c.value, c.low, c.high) for c in self.constants]
        return SystemModel(
            self.name, [table[s] for s in self.states], [table[u] for u in self.inputs], dyn,
            consts, assumptions, seed, samples, tau,
        )

    @property
    def pinned(self) -> dict:
        return {c.name: _frac_text(c.value) for c in self.constants if c.value is not None}


def _frac_text(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _number(tok: str, line: int, col: int) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"expected a number, found {tok!r}", line, col) from None


def parse_document(text: str) -> ModelDocument:
    doc = ModelDocument()
    seen_model = False
    declared: set = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        body = line.strip()
        head, _, rest = body.partition(" ")
        rest_col = indent + len(head) + 2 + (len(rest) - len(rest.lstrip()))
        rest = rest.strip()
        if head not in _KEYWORDS:
            raise ParseError(f"unknown declaration {head!r}", lineno, indent + 1)

        def names(txt, col):
            out = txt.split()
            if not out:
                raise ParseError(f"'{head}' needs at least one name", lineno, col)
            start = col - 1
            for n in out:
                pos = raw.index(n, start) + 1
                start = pos - 1 + len(n)
                if not _NAME.match(n):
                    raise ParseError(f"invalid name {n!r}", lineno, pos)
                if n in declared:
                    raise ParseError(f"{n!r} declared twice", lineno, pos)
                declared.add(n)
            return out

        if head == "model":
            if seen_model:
                raise ParseError("duplicate 'model' line", lineno, indent + 1)
            if not rest or not _NAME.match(rest.replace("-", "_")):
                raise ParseError("model needs a name", lineno, rest_col)
            doc.name = rest
            seen_model = True
        elif head == "states":
            doc.states.extend(names(rest, rest_col))
        elif head == "inputs":
            doc.inputs.extend(names(rest, rest_col))
        elif head == "constant":
            name, eq, val = rest.partition("=")
            name = name.strip()
            names(name, rest_col)
            value = _number(val.strip(), lineno, rest_col) if eq else None
            doc.constants.append(ConstantDecl(name, value))
        elif head == "range":
            parts = rest.split()
            if len(parts) != 3:
                raise ParseError("range needs NAME LOW HIGH", lineno, rest_col)
            match = [c for c in doc.constants if c.name == parts[0]]
            if not match:
                raise ParseError(f"range for undeclared constant {parts[0]!r}", lineno, rest_col)
            lo, hi = _number(parts[1], lineno, rest_col), _number(parts[2], lineno, rest_col)
            if lo > hi:
                raise ParseError("range bounds are reversed", lineno, rest_col)
            match[0].low, match[0].high = lo, hi
        elif head == "dot":
            lhs, eq, rhs = rest.partition("=")
            lhs = lhs.strip()
            if not eq:
                raise ParseError("expected 'dot STATE = EXPR'", lineno, rest_col)
            if lhs not in doc.states:
                raise ParseError(f"'dot' for undeclared state {lhs!r}", lineno, rest_col)
            if lhs in doc.dynamics:
                raise ParseError(f"duplicate dynamics for {lhs!r}", lineno, rest_col)
            col = line.index("=", indent) + 2 + (len(rhs) - len(rhs.lstrip()))
            doc.dynamics[lhs] = rhs.strip()
            doc.lines[("dot", lhs)] = (lineno, col)
        else:  # assume
            m = re.match(r"(.*?)\s*(!=|>)\s*0\s*$", rest)
            if not m:
                raise ParseError("expected 'assume EXPR != 0' or 'assume EXPR > 0'", lineno, rest_col)
            doc.lines[("assume", len(doc.assumptions))] = (lineno, rest_col)
            doc.assumptions.append((m.group(1), m.group(2)))
    if not seen_model:
        raise ParseError("missing 'model' line", 1, 1)
    if not doc.states:
        raise ParseError("missing 'states' line", 1, 1)
    if len(doc.inputs) != 2:
        raise ModelError(f"exactly two inputs are required, got {len(doc.inputs)}")
    # validate expression text eagerly so syntax errors carry positions
    table = doc.symbols()
    for s in doc.states:
        if s not in doc.dynamics:
            raise ModelError(f"no dynamics for state {s!r}")
        line, col = doc.lines[("dot", s)]
        parse_expr(doc.dynamics[s], table, line, col)
    for i, (t, _) in enumerate(doc.assumptions):
        line, col = doc.lines[("assume", i)]
        parse_expr(t, table, line, col)
    return doc


def parse_model(text: str, seed: int = DEFAULT_SEED, samples: int = DEFAULT_SAMPLES,
                tau: float = TAU_ZERO) -> SystemModel:
    """Parse and fully validate, including the rank-2 input condition."""
    return parse_document(text).build(seed, samples, tau)
