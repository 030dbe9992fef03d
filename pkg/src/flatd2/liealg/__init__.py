"""Vector fields, forms, distributions and their Lie-algebraic operations."""
from .distribution import (
    Codistribution, Distribution, annihilator, bracket_with, cauchy_characteristic, contains,
    derived_flag, generic_rank, in_cauchy, involutive_closure, is_involutive, span_sum,
)
from .fields import Frame, OneForm, VectorField, ad_iterate, differential, lie_bracket, tidy
from .linalg import DegeneracyError, determinant, nullspace

sum = span_sum  # noqa: A001 - public name mirrors the operation

__all__ = [
    "Codistribution", "DegeneracyError", "Distribution", "Frame", "OneForm", "VectorField",
    "ad_iterate", "annihilator", "bracket_with", "cauchy_characteristic", "contains",
    "derived_flag", "determinant", "differential", "generic_rank", "in_cauchy",
    "involutive_closure", "is_involutive", "lie_bracket", "nullspace", "span_sum", "sum", "tidy",
]
