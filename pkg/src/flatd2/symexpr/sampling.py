"""Generic-point sampling and the probabilistic zero test.

Points are drawn from a fixed pseudo-random stream per seed and filtered
against the domain constraints, so the first ``k`` feasible points are the
same whatever total is requested.  That prefix property is what makes
:func:`is_zero` monotone in the sample count.
"""
from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .evaluate import Tape
from .expr import CONST, FUNC, POW, Expr, ExprError, add, as_expr, cos, mul, postorder

TAU_ZERO = 1e-9
DEFAULT_SAMPLES = 25
DEFAULT_SEED = 0
MARGIN = Fraction(1, 10)
ARCSIN_BOUND = Fraction(9, 10)
ERR_FACTOR = 8.0

_BATCH = 64
_MAX_DRAWS = 200_000

# constraint kinds
NONZERO, POSITIVE, ABS_LE = "nonzero", "positive", "abs_le"


class SamplingError(ExprError):
    """No feasible point could be found; assumptions are too tight."""


class Point(Mapping):
    """Immutable assignment of exact values to variables and constants."""

    __slots__ = ("variables", "constants")

    def __init__(self, variables: Mapping[str, Fraction], constants: Mapping[str, Fraction] | None = None):
        object.__setattr__(self, "variables", dict(variables))
        object.__setattr__(self, "constants", dict(constants or {}))

    def __setattr__(self, *_):
        raise AttributeError("Point is immutable")

    def __getitem__(self, name):
        if name in self.variables:
            return self.variables[name]
        return self.constants[name]

    def __iter__(self):
        yield from self.variables
        yield from self.constants

    def __len__(self):
        return len(self.variables) + len(self.constants)

    def __repr__(self):
        body = ", ".join(f"{k}={v}" for k, v in self.items())
        return f"Point({body})"

    def to_json(self) -> dict:
        return {k: str(v) for k, v in self.items()}


@dataclass(frozen=True)
class ConstantSpec:
    symbol: Expr
    value: Fraction | None = None
    low: Fraction = Fraction(1, 2)
    high: Fraction = Fraction(2)


@dataclass(frozen=True)
class Domain:
    """Where generic points live: sampled symbols plus constraints."""

    variables: tuple
    constants: tuple = ()
    constraints: tuple = ()

    @property
    def columns(self) -> tuple:
        return self.variables + tuple(c.symbol for c in self.constants)

    @classmethod
    def infer(cls, exprs: Iterable[Expr]) -> "Domain":
        exprs = list(exprs)
        syms = set()
        for e in exprs:
            syms |= e.free_symbols
        ordered = sorted(syms, key=lambda s: s.name)
        variables = tuple(s for s in ordered if not s.is_constant_symbol)
        constants = tuple(ConstantSpec(s) for s in ordered if s.is_constant_symbol)
        return cls(variables, constants, tuple(domain_constraints(exprs)))


def domain_constraints(exprs: Iterable[Expr]) -> list:
    """Constraints implied by the function domains appearing in ``exprs``."""
    out = []
    seen = set()

    def push(e, kind):
        if e.kind == CONST:
            return
        if (e, kind) not in seen:
            seen.add((e, kind))
            out.append((e, kind))

    for n in postorder(list(exprs)):
        if n.kind == POW and n.payload < 0:
            push(n.args[0], NONZERO)
        elif n.kind == FUNC:
            a = n.args[0]
            if n.payload in ("sqrt", "log"):
                push(a, POSITIVE)
            elif n.payload == "arcsin":
                push(a, ABS_LE)
            elif n.payload == "tan":
                push(cos(a), NONZERO)
    return out


def _feasible(vals: np.ndarray, kinds: Sequence[str]) -> np.ndarray:
    ok = np.all(np.isfinite(vals), axis=1)
    m = float(MARGIN)
    for j, kind in enumerate(kinds):
        v = vals[:, j]
        if kind == NONZERO:
            ok &= np.abs(v) > m
        elif kind == POSITIVE:
            ok &= v > m
        else:
            ok &= np.abs(v) <= float(ARCSIN_BOUND)
    return ok


@lru_cache(maxsize=256)
def _draw(domain: Domain, seed: int, count: int):
    rng = np.random.default_rng(seed)
    nvar = len(domain.variables)
    consts = domain.constants
    tape = None
    kinds = [k for _, k in domain.constraints]
    if domain.constraints:
        tape = Tape([e for e, _ in domain.constraints], domain.columns)
    ints: list = []
    drawn = 0
    while len(ints) < count:
        if drawn > _MAX_DRAWS:
            raise SamplingError(
                f"found only {len(ints)} of {count} feasible points after {drawn} draws"
            )
        batch = np.empty((_BATCH, nvar + len(consts)), dtype=np.int64)
        batch[:, :nvar] = rng.integers(-2000, 2001, size=(_BATCH, nvar))
        for j, c in enumerate(consts):
            if c.value is not None:
                lo = hi = int(c.value * 1000)
            else:
                lo, hi = int(c.low * 1000), int(c.high * 1000)
            batch[:, nvar + j] = rng.integers(lo, hi + 1, size=_BATCH)
        drawn += _BATCH
        if tape is not None:
            with np.errstate(all="ignore"):
                vals, _ = tape.run(batch / 1000.0)
            ok = _feasible(vals, kinds)
        else:
            ok = np.ones(_BATCH, dtype=bool)
        for row in batch[ok]:
            ints.append(row)
            if len(ints) == count:
                break
    ints = np.asarray(ints, dtype=np.int64).reshape(count, nvar + len(consts))
    # pinned constants may be non-representable on the 1/1000 grid
    matrix = ints / 1000.0
    for j, c in enumerate(consts):
        if c.value is not None:
            matrix[:, nvar + j] = float(c.value)
    matrix.setflags(write=False)
    return ints, matrix


class Sampler:
    """Deterministic stream of feasible points for a :class:`Domain`."""

    def __init__(self, domain: Domain, seed: int = DEFAULT_SEED):
        self.domain = domain
        self.seed = int(seed)

    def matrix(self, count: int) -> np.ndarray:
        """Feasible points as a float array (count x columns)."""
        return _draw(self.domain, self.seed, int(count))[1]

    def points(self, count: int) -> list:
        ints = _draw(self.domain, self.seed, int(count))[0]
        nvar = len(self.domain.variables)
        out = []
        for row in ints:
            var = {s.name: Fraction(int(v), 1000) for s, v in zip(self.domain.variables, row)}
            con = {}
            for c, v in zip(self.domain.constants, row[nvar:]):
                con[c.symbol.name] = c.value if c.value is not None else Fraction(int(v), 1000)
            out.append(Point(var, con))
        return out

    def evaluate(self, exprs: Sequence[Expr], count: int):
        """Values and rounding-error bounds, each (count x len(exprs))."""
        tape = Tape(list(exprs), self.domain.columns)
        return tape.run(self.matrix(count))


@dataclass(frozen=True)
class ZeroVerdict:
    identically_zero: bool
    samples: int
    seed: int
    witness: Point | None = None
    value: float | None = None
    confidence: str = field(default="probabilistic")

    def __bool__(self):
        return self.identically_zero

    @property
    def outcome(self) -> str:
        return "identically-zero" if self.identically_zero else "nonzero"


def domain_of(model) -> Domain:
    if model is None:
        return None
    if isinstance(model, Domain):
        return model
    return model.domain


def nonzero_mask(vals: np.ndarray, errs: np.ndarray, tau: float = TAU_ZERO) -> np.ndarray:
    """Entries that are numerically nonzero beyond tolerance and rounding noise."""
    with np.errstate(invalid="ignore"):
        return np.isfinite(vals) & (np.abs(vals) > np.maximum(tau, ERR_FACTOR * errs))


def is_zero(e, model=None, samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
            tau: float = TAU_ZERO) -> ZeroVerdict:
    """Probabilistic identity test of ``e`` against zero on the model's domain."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    e = as_expr(e)
    if e.kind == CONST:
        if e.payload == 0:
            return ZeroVerdict(True, 0, seed)
        return ZeroVerdict(False, 0, seed, Point({}), float(e.payload))
    domain = domain_of(model)
    if domain is None or not e.free_symbols <= set(domain.columns):
        base = domain or Domain(())
        extra = Domain.infer([e])
        domain = Domain(
            tuple(sorted(set(base.variables) | set(extra.variables), key=lambda s: s.name)),
            base.constants + tuple(c for c in extra.constants
                                   if c.symbol not in {b.symbol for b in base.constants}),
            base.constraints + tuple(c for c in extra.constraints if c not in base.constraints),
        )
    sampler = Sampler(domain, seed)
    vals, errs = sampler.evaluate([e], samples)
    hit = nonzero_mask(vals[:, 0], errs[:, 0], tau)
    if hit.any():
        i = int(np.argmax(hit))
        return ZeroVerdict(False, samples, seed, sampler.points(samples)[i], float(vals[i, 0]))
    if not np.isfinite(vals[:, 0]).any():
        raise SamplingError("expression is undefined at every sampled point")
    return ZeroVerdict(True, samples, seed)


def equal(a, b, model=None, **kw) -> bool:
    return bool(is_zero(add(as_expr(a), mul(-1, as_expr(b))), model, **kw))
