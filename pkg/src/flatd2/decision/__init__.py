"""Decision procedures for d = 0, 1, 2."""
from .algwithin import AlgWithinReport, AlgWithinSolution, solve_alg_within
from .model import Assumption, ModelError, SystemModel
from .theorems import (
    AutonomousSubsystemError, BracketSequence, Classification, bracket_sequence,
    build_bracket_sequence, check_d1, check_d2, classify, static_feedback_linearizable,
)
from .trace import (
    FLAT_D1, FLAT_D2, LEGAL_PATHS, SFL, BranchRecord, Claim, DecisionTrace, LadderSlot,
    not_flat_verdict,
)

__all__ = [name for name in dir() if not name.startswith("_")]
