"""Rank decisions at sample points and nullspaces over the function field."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from ..symexpr import ZERO, Expr, ExprError, SamplingError, add, as_expr, div, mul
from ..symexpr.sampling import ERR_FACTOR


class DegeneracyError(ExprError):
    """Rank is not locally constant across generic samples."""


def point_ranks(vals: np.ndarray, errs: np.ndarray, tau: float) -> np.ndarray:
    """Per-point rank of stacks of row vectors.

    ``vals``/``errs`` are (points, rows, cols).  Rows are normalized first
    so the threshold does not depend on scaling; a row whose norm is within
    its rounding bound counts as zero.  Points with non-finite entries are
    dropped.
    """
    if vals.shape[1] == 0 or vals.shape[2] == 0:
        return np.zeros(vals.shape[0], dtype=int)
    with np.errstate(all="ignore"):
        finite = np.isfinite(vals).all(axis=(1, 2)) & np.isfinite(errs).all(axis=(1, 2))
        if not finite.any():
            raise SamplingError("no sample point where all entries are finite")
        vals = vals[finite]
        errs = errs[finite]
        norms = np.linalg.norm(vals, axis=2)
        enorms = np.linalg.norm(errs, axis=2)
        live = norms > np.maximum(tau, ERR_FACTOR * enorms)
        scale = np.where(live, 1.0 / np.where(live, norms, 1.0), 0.0)
        vn = vals * scale[..., None]
        en = errs * scale[..., None]
        sv = np.linalg.svd(vn, compute_uv=False)
        tol = np.maximum(tau, ERR_FACTOR * np.linalg.norm(en, axis=(1, 2)))
    return (sv > tol[:, None]).sum(axis=1)


def generic_rank_of(vals: np.ndarray, errs: np.ndarray, tau: float, what: str = "matrix") -> int:
    ranks = point_ranks(vals, errs, tau)
    if len(ranks) == 0:
        return 0
    top = int(ranks.max())
    med = float(np.median(ranks))
    if med < top:
        raise DegeneracyError(
            f"rank of {what} is not locally constant at generic samples "
            f"(max {top}, median {med:g})"
        )
    return top


def greedy_independent(vals, errs, tau, order: Sequence[int], fixed: Sequence[int] = ()) -> list:
    """Indices from ``order`` that raise the rank, on top of ``fixed``.

    ``vals``/``errs`` are (points, items, dim); items are row vectors.
    """
    chosen = list(fixed)
    rank = generic_rank_of(vals[:, chosen], errs[:, chosen], tau) if chosen else 0
    picked = []
    full = vals.shape[2]
    for i in order:
        if rank == full:
            break
        trial = chosen + [i]
        r = generic_rank_of(vals[:, trial], errs[:, trial], tau)
        if r > rank:
            chosen.append(i)
            picked.append(i)
            rank = r
    return picked


# ---------------------------------------------------------------- symbolic

def determinant(rows: Sequence[Sequence[Expr]]) -> Expr:
    """Laplace expansion along rows, memoized over remaining column sets."""
    n = len(rows)
    if n == 0:
        return as_expr(1)
    memo: dict = {}

    def rec(r: int, cols: int) -> Expr:
        if r == n:
            return as_expr(1)
        key = (r, cols)
        hit = memo.get(key)
        if hit is not None:
            return hit
        terms = []
        sign = 1
        for c in range(n):
            if not cols >> c & 1:
                continue
            a = rows[r][c]
            if not a.is_zero_const:
                sub = rec(r + 1, cols & ~(1 << c))
                if not sub.is_zero_const:
                    terms.append(mul(sign, a, sub))
            sign = -sign
        out = add(*terms) if terms else ZERO
        memo[key] = out
        return out

    return rec(0, (1 << n) - 1)


def nullspace(matrix: Sequence[Sequence[Expr]], num_vals: np.ndarray, num_errs: np.ndarray,
              tau: float, tidy=lambda e: e) -> list:
    """Basis of {x : M x = 0} over the field of functions.

    ``matrix`` is m x k; ``num_vals``/``num_errs`` hold its entries at the
    sample points, shaped (points, m, k).  Pivot columns and rows are picked
    numerically, simplest first; kernel vectors come from Cramer's rule with
    a unit entry in the free column.
    """
    m = len(matrix)
    k = len(matrix[0]) if m else num_vals.shape[2]
    if m == 0:
        return [[as_expr(1) if i == j else ZERO for i in range(k)] for j in range(k)]
    col_cost = [sum(matrix[i][j].size for i in range(m)) for j in range(k)]
    cols_order = sorted(range(k), key=lambda j: (col_cost[j], j))
    # columns as row vectors: (points, k, m)
    cv = np.transpose(num_vals, (0, 2, 1))
    ce = np.transpose(num_errs, (0, 2, 1))
    pivots = greedy_independent(cv, ce, tau, cols_order)
    r = len(pivots)
    if r == 0:
        return [[as_expr(1) if i == j else ZERO for i in range(k)] for j in range(k)]
    pv = num_vals[:, :, pivots]
    pe = num_errs[:, :, pivots]
    row_cost = [sum(matrix[i][j].size for j in pivots) for i in range(m)]
    rows = greedy_independent(pv, pe, tau, sorted(range(m), key=lambda i: (row_cost[i], i)))
    if len(rows) != r:
        raise DegeneracyError("row and column ranks disagree at samples")
    pivots = sorted(pivots)
    B = [[matrix[i][j] for j in pivots] for i in rows]
    detB = determinant(B)
    basis = []
    for j in range(k):
        if j in pivots:
            continue
        x = [ZERO] * k
        x[j] = as_expr(1)
        for t, p in enumerate(pivots):
            Bt = [[(-matrix[i][j] if c == t else B[a][c]) for c in range(r)]
                  for a, i in enumerate(rows)]
            x[p] = tidy(div(determinant(Bt), detB))
        basis.append(x)
    return basis
