"""Flat outputs, relative degrees and the prolongation cross-check."""
from .extract import (
    ExtractionError, FlatOutputCandidate, FlatOutputCheck, RelativeDegreeReport,
    extract_flat_output, ladder_distributions, lie_derivative, relative_degrees, verify_flat_output,
)
from .integrate import find_functions, integrate_one_form
from .missing import Completion, MissingDistributionError, complete_missing, complete_missing_distribution
from .oracle import OracleError, OracleResult, derive_ubar1, prolongation_oracle

__all__ = [name for name in dir() if not name.startswith("_")]
