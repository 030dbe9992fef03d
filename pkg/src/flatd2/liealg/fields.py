"""Coordinate frames, vector fields and one-forms on X x U."""
from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np

from ..symexpr.expr import ADD, CONST, MUL
from ..symexpr import (
    DEFAULT_SAMPLES, DEFAULT_SEED, TAU_ZERO, ZERO, Domain, Expr, ExprError, Sampler,
    add, as_expr, differentiate, is_zero, mul, neg, simplify, to_text,
)


class Frame:
    """Coordinates (x^1..x^n, u^1, u^2) plus the sampling context.

    Every field, form and distribution belongs to exactly one frame, and all
    numeric decisions made for it use the frame's points.
    """

    def __init__(self, states: Sequence[Expr], inputs: Sequence[Expr], domain: Domain,
                 seed: int = DEFAULT_SEED, samples: int = DEFAULT_SAMPLES, tau: float = TAU_ZERO):
        self.states = tuple(states)
        self.inputs = tuple(inputs)
        self.coords = self.states + self.inputs
        self.domain = domain
        self.seed = int(seed)
        self.samples = int(samples)
        self.tau = float(tau)
        self.sampler = Sampler(domain, self.seed)
        self._index = {s: i for i, s in enumerate(self.coords)}
        missing = set(self.coords) - set(domain.columns)
        if missing:
            raise ExprError(f"coordinates missing from domain: {sorted(s.name for s in missing)}")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def index(self, sym: Expr) -> int:
        return self._index[sym]

    def evaluate(self, exprs: Sequence[Expr]):
        """(values, errors), each shaped (samples, len(exprs))."""
        if not exprs:
            z = np.zeros((self.samples, 0))
            return z, z
        return self.sampler.evaluate(list(exprs), self.samples)

    def is_zero(self, e: Expr) -> bool:
        return bool(is_zero(e, self.domain, self.samples, self.seed, self.tau))

    def points(self):
        return self.sampler.points(self.samples)

    def coordinate_field(self, sym: Expr) -> "VectorField":
        c = [ZERO] * self.dim
        c[self.index(sym)] = as_expr(1)
        return VectorField(self, c)

    def coordinate_form(self, sym: Expr) -> "OneForm":
        c = [ZERO] * self.dim
        c[self.index(sym)] = as_expr(1)
        return OneForm(self, c)

    def with_sampling(self, seed=None, samples=None, tau=None) -> "Frame":
        return Frame(self.states, self.inputs, self.domain,
                     self.seed if seed is None else seed,
                     self.samples if samples is None else samples,
                     self.tau if tau is None else tau)


@lru_cache(maxsize=50_000)
def tidy(e: Expr) -> Expr:
    """Cached best-effort simplification used on every new coefficient."""
    return simplify(e)


class _Coeffs:
    __slots__ = ("frame", "coeffs", "_num")

    def __init__(self, frame: Frame, coeffs):
        coeffs = tuple(as_expr(c) for c in coeffs)
        if len(coeffs) != frame.dim:
            raise ExprError(f"expected {frame.dim} coefficients, got {len(coeffs)}")
        coord_set = set(frame.domain.columns)
        for c in coeffs:
            bad = c.free_symbols - coord_set
            if bad:
                raise ExprError(f"undeclared symbols {sorted(s.name for s in bad)}")
        self.frame = frame
        self.coeffs = coeffs
        self._num = None

    def __iter__(self):
        return iter(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i]

    def __len__(self):
        return len(self.coeffs)

    def __eq__(self, other):
        return type(self) is type(other) and self.frame is other.frame and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((type(self).__name__, self.coeffs))

    @property
    def is_structurally_zero(self) -> bool:
        return all(c.is_zero_const for c in self.coeffs)

    def numeric(self):
        """Cached (values, errors) at the frame's points, each (samples, dim)."""
        if self._num is None:
            v, e = self.frame.evaluate(self.coeffs)
            self._num = (v, e)
        return self._num

    def scaled(self, factor):
        factor = as_expr(factor)
        return type(self)(self.frame, [tidy(mul(factor, c)) for c in self.coeffs])

    def __add__(self, other):
        _same_frame(self, other)
        return type(self)(self.frame, [tidy(add(a, b)) for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        _same_frame(self, other)
        return type(self)(self.frame, [tidy(add(a, mul(-1, b))) for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return self.scaled(-1)

    def is_zero(self) -> bool:
        return all(self.frame.is_zero(c) for c in self.coeffs)

    def _render(self, prefix):
        out = ""
        for c, z in zip(self.coeffs, self.frame.coords):
            if c.is_zero_const:
                continue
            negative = c.kind in (CONST, MUL) and c.payload < 0
            body = neg(c) if negative else c
            txt = to_text(body)
            if txt == "1":
                term = f"{prefix}{z.name}"
            elif body.kind == ADD:
                term = f"({txt})*{prefix}{z.name}"
            else:
                term = f"{txt}*{prefix}{z.name}"
            if not out:
                out = f"-{term}" if negative else term
            else:
                out += f" - {term}" if negative else f" + {term}"
        return out or "0"


def _same_frame(a, b):
    if a.frame is not b.frame:
        raise ExprError("objects belong to different frames")


def batch_numeric(objs):
    """Fill numeric caches of many fields/forms with one shared tape."""
    todo = [o for o in objs if o._num is None]
    if todo:
        frame = todo[0].frame
        exprs = [c for o in todo for c in o.coeffs]
        v, e = frame.evaluate(exprs)
        n = frame.dim
        for k, o in enumerate(todo):
            o._num = (v[:, k * n:(k + 1) * n], e[:, k * n:(k + 1) * n])
    return [o.numeric() for o in objs]


class VectorField(_Coeffs):
    """Sum of coeff_i * d/dz_i over the frame coordinates."""

    __slots__ = ()

    def __repr__(self):
        return f"VectorField({self})"

    def __str__(self):
        return self._render("d_")

    def apply(self, h: Expr) -> Expr:
        """Directional derivative v(h)."""
        terms = []
        for c, z in zip(self.coeffs, self.frame.coords):
            if c.is_zero_const:
                continue
            dh = differentiate(h, z)
            if not dh.is_zero_const:
                terms.append(mul(c, dh))
        return add(*terms)


class OneForm(_Coeffs):
    """Sum of coeff_i * dz_i."""

    __slots__ = ()

    def __repr__(self):
        return f"OneForm({self})"

    def __str__(self):
        return self._render("d")

    def contract(self, v: VectorField) -> Expr:
        """omega(v)."""
        _same_frame(self, v)
        return add(*(mul(a, b) for a, b in zip(self.coeffs, v.coeffs)
                     if not a.is_zero_const and not b.is_zero_const))

    def exterior_derivative(self) -> dict:
        """Nonzero structural components (i, j) -> d_i w_j - d_j w_i for i < j."""
        out = {}
        coords = self.frame.coords
        for i in range(len(coords)):
            for j in range(i + 1, len(coords)):
                c = tidy(add(differentiate(self.coeffs[j], coords[i]),
                             mul(-1, differentiate(self.coeffs[i], coords[j]))))
                if not c.is_zero_const:
                    out[(i, j)] = c
        return out

    def is_closed(self) -> bool:
        return all(self.frame.is_zero(c) for c in self.exterior_derivative().values())


def differential(frame: Frame, h: Expr) -> OneForm:
    return OneForm(frame, [tidy(differentiate(h, z)) for z in frame.coords])


def lie_bracket(v: VectorField, w: VectorField) -> VectorField:
    """[v, w] = v(w) - w(v), componentwise."""
    _same_frame(v, w)
    out = []
    for wi, vi in zip(w.coeffs, v.coeffs):
        out.append(tidy(add(v.apply(wi), mul(-1, w.apply(vi)))))
    return VectorField(v.frame, out)


def ad_iterate(f: VectorField, v: VectorField, k: int) -> VectorField:
    """ad_f^k v with ad_f^0 v = v and ad_f^k v = [f, ad_f^(k-1) v]."""
    if k < 0:
        raise ValueError("k must be >= 0")
    for _ in range(k):
        v = lie_bracket(f, v)
    return v
