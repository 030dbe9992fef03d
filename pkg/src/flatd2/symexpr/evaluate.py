"""Numeric evaluation.

Two paths:

* :func:`evaluate` -- one point, exact :class:`~fractions.Fraction` arithmetic
  as long as no transcendental function is hit, ``float`` afterwards.
* :class:`Tape` -- a flattened post-order program over many roots, evaluated
  at a batch of points.  Alongside each value it propagates a first-order
  bound on the floating-point rounding error, which the zero and rank tests
  use to tell genuine zeros from cancellation noise.  The batch evaluator is
  the hot loop of the whole package and has a compiled implementation
  (``flatd2.symexpr._tape``); the NumPy version below is the fallback.
"""
from __future__ import annotations

import math
import os
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .expr import ADD, CONST, MUL, POW, SYM, Expr, ExprError, postorder

OP_CONST, OP_SYM, OP_ADD, OP_MUL, OP_POW = 0, 1, 2, 3, 4
OP_FUNC = {"sin": 5, "cos": 6, "tan": 7, "arcsin": 8, "sqrt": 9, "exp": 10, "log": 11}

EPS = float(np.finfo(float).eps) / 2

try:  # pragma: no cover - exercised through BACKEND
    if os.environ.get("FLATD2_PURE_PYTHON"):
        raise ImportError("compiled kernel disabled by FLATD2_PURE_PYTHON")
    from . import _tape as _compiled
except ImportError:
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "numpy"


class EvaluationError(ExprError):
    def __init__(self, message: str, subterm: Expr | None = None):
        if subterm is not None:
            from .printing import to_text

            message = f"{message} in subterm {to_text(subterm)!r}"
        super().__init__(message)
        self.subterm = subterm


# ---------------------------------------------------------------- one point

def evaluate(e: Expr, point: Mapping):
    """Value of ``e`` at ``point`` (mapping symbol or symbol name -> number)."""
    values = {}
    for k, v in point.items():
        values[k if isinstance(k, str) else k.name] = v
    memo: dict = {}
    for n in postorder([e]):
        memo[n] = _eval_node(n, memo, values)
    return memo[e]


def _num(x):
    if isinstance(x, float):
        return x
    return Fraction(x)


def _eval_node(n: Expr, memo, values):
    k = n.kind
    if k == CONST:
        return n.payload
    if k == SYM:
        name = n.payload[0]
        if name not in values:
            raise EvaluationError(f"no value for symbol {name!r}", n)
        return _num(values[name])
    args = [memo[a] for a in n.args]
    if k == ADD:
        return sum(args[1:], args[0])
    if k == MUL:
        acc = n.payload
        for a in args:
            acc = acc * a
        return acc
    if k == POW:
        b = args[0]
        if b == 0 and n.payload < 0:
            raise EvaluationError("division by zero", n.args[0])
        return b ** n.payload
    a = args[0]
    name = n.payload
    try:
        if name == "sqrt":
            if a < 0:
                raise EvaluationError("sqrt of a negative value", n)
            if isinstance(a, Fraction):
                r = math.isqrt(a.numerator), math.isqrt(a.denominator)
                if r[0] ** 2 == a.numerator and r[1] ** 2 == a.denominator:
                    return Fraction(*r)
            return math.sqrt(a)
        if name == "log":
            if a <= 0:
                raise EvaluationError("log of a non-positive value", n)
            return math.log(a)
        if name == "arcsin":
            if abs(a) > 1:
                raise EvaluationError("arcsin argument outside [-1, 1]", n)
            return math.asin(a)
        if name == "tan":
            if math.cos(a) == 0:
                raise EvaluationError("tan at a pole", n)
            return math.tan(a)
        if a == 0 and name in ("sin",):
            return Fraction(0)
        return {"sin": math.sin, "cos": math.cos, "exp": math.exp}[name](a)
    except OverflowError:
        raise EvaluationError("overflow", n) from None


# ---------------------------------------------------------------- tapes

class Tape:
    """Post-order program for a list of roots over named input columns."""

    def __init__(self, roots: Sequence[Expr], columns: Sequence[Expr]):
        self.roots = list(roots)
        col_index = {s: i for i, s in enumerate(columns)}
        nodes = postorder(self.roots)
        index = {id(n): i for i, n in enumerate(nodes)}
        ops = np.empty(len(nodes), dtype=np.int32)
        ipay = np.zeros(len(nodes), dtype=np.int32)
        fpay = np.zeros(len(nodes), dtype=np.float64)
        arg_ptr = np.zeros(len(nodes) + 1, dtype=np.int32)
        arg_idx = []
        for i, n in enumerate(nodes):
            k = n.kind
            if k == CONST:
                ops[i] = OP_CONST
                fpay[i] = float(n.payload)
            elif k == SYM:
                if n not in col_index:
                    raise EvaluationError(f"no input column for symbol {n.name!r}", n)
                ops[i] = OP_SYM
                ipay[i] = col_index[n]
            elif k == ADD:
                ops[i] = OP_ADD
            elif k == MUL:
                ops[i] = OP_MUL
                fpay[i] = float(n.payload)
            elif k == POW:
                ops[i] = OP_POW
                ipay[i] = n.payload
            else:
                ops[i] = OP_FUNC[n.payload]
            arg_idx.extend(index[id(a)] for a in n.args)
            arg_ptr[i + 1] = len(arg_idx)
        self.nodes = nodes
        self.ops = ops
        self.ipay = ipay
        self.fpay = fpay
        self.arg_ptr = arg_ptr
        self.arg_idx = np.asarray(arg_idx, dtype=np.int32)
        self.root_index = np.asarray([index[id(r)] for r in self.roots], dtype=np.int64)

    def __len__(self):
        return len(self.nodes)

    def run(self, inputs: np.ndarray, backend: str | None = None):
        """Evaluate at ``inputs`` (points x columns).

        Returns ``(values, errors)``, each shaped (points, roots).  Domain
        violations show up as non-finite values.
        """
        inputs = np.ascontiguousarray(inputs, dtype=np.float64)
        backend = backend or BACKEND
        if backend == "compiled":
            if _compiled is None:
                raise RuntimeError("compiled kernel not available")
            val, err = _compiled.run_tape(
                self.ops, self.ipay, self.fpay, self.arg_ptr, self.arg_idx,
                self.root_index, inputs,
            )
            return val, err
        return _run_numpy(self, inputs)


def _run_numpy(tape: Tape, inputs: np.ndarray):
    npts = inputs.shape[0]
    nn = len(tape.nodes)
    val = np.empty((nn, npts))
    err = np.empty((nn, npts))
    ops, ipay, fpay, ptr, idx = tape.ops, tape.ipay, tape.fpay, tape.arg_ptr, tape.arg_idx
    with np.errstate(all="ignore"):
        for i in range(nn):
            op = ops[i]
            a0, a1 = ptr[i], ptr[i + 1]
            if op == OP_CONST:
                c = fpay[i]
                val[i] = c
                err[i] = abs(c) * EPS
            elif op == OP_SYM:
                v = inputs[:, ipay[i]]
                val[i] = v
                err[i] = np.abs(v) * EPS
            elif op == OP_ADD:
                ch = idx[a0:a1]
                val[i] = val[ch].sum(axis=0)
                err[i] = err[ch].sum(axis=0) + (a1 - a0) * EPS * np.abs(val[ch]).sum(axis=0)
            elif op == OP_MUL:
                ch = idx[a0:a1]
                c = fpay[i]
                vs = val[ch]
                m = len(ch)
                prefix = np.ones((m + 1, npts))
                suffix = np.ones((m + 1, npts))
                av = np.abs(vs)
                for j in range(m):
                    prefix[j + 1] = prefix[j] * av[j]
                    suffix[m - j - 1] = suffix[m - j] * av[m - j - 1]
                prod = c * np.prod(vs, axis=0)
                e = np.zeros(npts)
                for j in range(m):
                    e += err[ch[j]] * prefix[j] * suffix[j + 1]
                val[i] = prod
                err[i] = abs(c) * e + (m + 1) * EPS * np.abs(prod)
            elif op == OP_POW:
                b = val[idx[a0]]
                eb = err[idx[a0]]
                n = int(ipay[i])
                v = b ** float(n) if n < 0 else b ** n
                val[i] = v
                err[i] = abs(n) * np.abs(b) ** (n - 1) * eb + (abs(n) + 1) * EPS * np.abs(v)
            else:
                a = val[idx[a0]]
                ea = err[idx[a0]]
                if op == 5:
                    v = np.sin(a)
                    d = np.abs(np.cos(a))
                elif op == 6:
                    v = np.cos(a)
                    d = np.abs(np.sin(a))
                elif op == 7:
                    v = np.tan(a)
                    d = 1 + v * v
                elif op == 8:
                    v = np.arcsin(a)
                    d = 1 / np.sqrt(1 - a * a)
                elif op == 9:
                    v = np.sqrt(a)
                    d = 0.5 / v
                elif op == 10:
                    v = np.exp(a)
                    d = v
                else:
                    v = np.log(a)
                    d = 1 / np.abs(a)
                val[i] = v
                err[i] = d * ea + 2 * EPS * np.abs(v) + EPS * np.abs(a) * d
    r = tape.root_index
    return val[r].T.copy(), err[r].T.copy()
