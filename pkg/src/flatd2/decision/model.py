"""Two-input control systems."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


from ..liealg import DegeneracyError, Frame, VectorField
from ..liealg.linalg import generic_rank_of
from ..symexpr import (
    DEFAULT_SAMPLES, DEFAULT_SEED, TAU_ZERO, ZERO, ConstantSpec, Domain, Expr, ExprError,
    differentiate, domain_constraints,
)
from ..symexpr.sampling import NONZERO, POSITIVE


class ModelError(ExprError):
    """Semantic problem with a system description."""


@dataclass(frozen=True)
class Assumption:
    expr: Expr
    relation: str  # "!=" or ">"

    @property
    def kind(self) -> str:
        return NONZERO if self.relation == "!=" else POSITIVE


class SystemModel:
    """x' = f(x, u) with exactly two inputs.

    Sampling parameters (seed, samples, tau) are part of the value: every
    rank and zero decision made for this model uses them.
    """

    def __init__(self, name: str, states: Sequence[Expr], inputs: Sequence[Expr],
                 dynamics: Sequence[Expr], constants: Sequence[ConstantSpec] = (),
                 assumptions: Sequence[Assumption] = (), seed: int = DEFAULT_SEED,
                 samples: int = DEFAULT_SAMPLES, tau: float = TAU_ZERO, check: bool = True):
        self.name = name
        self.states = tuple(states)
        self.inputs = tuple(inputs)
        self.dynamics = tuple(dynamics)
        self.constants = tuple(constants)
        self.assumptions = tuple(assumptions)
        if not self.states:
            raise ModelError("a model needs at least one state")
        if len(self.inputs) != 2:
            raise ModelError(f"exactly two inputs are required, got {len(self.inputs)}")
        if len(self.dynamics) != len(self.states):
            raise ModelError("one dynamics expression per state is required")
        names = [s.name for s in self.states + self.inputs] + [c.symbol.name for c in self.constants]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise ModelError(f"duplicate declarations: {sorted(dup)}")
        known = set(self.states + self.inputs) | {c.symbol for c in self.constants}
        for e in list(self.dynamics) + [a.expr for a in self.assumptions]:
            bad = e.free_symbols - known
            if bad:
                raise ModelError(f"undeclared symbols {sorted(s.name for s in bad)}")
        constraints = [(a.expr, a.kind) for a in self.assumptions]
        for c in domain_constraints(list(self.dynamics) + [a.expr for a in self.assumptions]):
            if c not in constraints:
                constraints.append(c)
        self.domain = Domain(self.states + self.inputs, self.constants, tuple(constraints))
        self.frame = Frame(self.states, self.inputs, self.domain, seed, samples, tau)
        self.f = VectorField(self.frame, list(self.dynamics) + [ZERO, ZERO])
        if check:
            self.check_input_rank()

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def seed(self) -> int:
        return self.frame.seed

    @property
    def samples(self) -> int:
        return self.frame.samples

    @property
    def tau(self) -> float:
        return self.frame.tau

    def input_jacobian(self) -> list:
        return [[differentiate(fi, u) for u in self.inputs] for fi in self.dynamics]

    def check_input_rank(self) -> None:
        J = self.input_jacobian()
        cols = [[J[i][j] for i in range(self.n)] for j in range(2)]
        v, e = self.frame.evaluate([x for col in cols for x in col])
        v = v.reshape(-1, 2, self.n)
        e = e.reshape(-1, 2, self.n)
        try:
            r = generic_rank_of(v, e, self.tau, "d_u f")
        except DegeneracyError as err:
            raise ModelError(f"input rank check failed: {err}") from None
        if r != 2:
            raise ModelError(f"rank of d_u f is {r}; two independent inputs are required")

    def with_sampling(self, seed=None, samples=None, tau=None) -> "SystemModel":
        return SystemModel(
            self.name, self.states, self.inputs, self.dynamics, self.constants, self.assumptions,
            self.seed if seed is None else seed,
            self.samples if samples is None else samples,
            self.tau if tau is None else tau,
            check=False,
        )

    def with_dynamics(self, name: str, dynamics: Sequence[Expr], assumptions=None) -> "SystemModel":
        return SystemModel(name, self.states, self.inputs, dynamics, self.constants,
                           self.assumptions if assumptions is None else assumptions,
                           self.seed, self.samples, self.tau)

    def __repr__(self):
        return f"SystemModel({self.name!r}, n={self.n})"
