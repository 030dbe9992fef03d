"""Exact expression kernel with probabilistic identity testing."""
from .calculus import differentiate, gradient
from .evaluate import BACKEND, EvaluationError, Tape, evaluate
from .expr import (
    FUNCTIONS, HALF, MINUS_ONE, ONE, ZERO, Const, Expr, ExprError, Symbol, add, arcsin,
    as_expr, cos, count_ops, div, exp, func, log, mul, neg, postorder, pow_, sin, sqrt,
    sub, substitute, tan,
)
from .parse import ParseError, parse_expr
from .printing import to_text
from .sampling import (
    DEFAULT_SAMPLES, DEFAULT_SEED, TAU_ZERO, ConstantSpec, Domain, Point, Sampler,
    SamplingError, ZeroVerdict, domain_constraints, equal, is_zero, nonzero_mask,
)
from .simplify import expand, simplify, trig_collapse

__all__ = [name for name in dir() if not name.startswith("_")]
