"""Tail bounds for probabilistic recurrence relations."""

from .canonicalizer import to_canonical
from .decider import decide
from .lrec import parse, parse_poly, validate
from .simulator import BACKEND, sample_costs, validate_bound
from .synthesizer import synthesize
from .theory import comp_tail_bound, solve_expected_runtime

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "to_canonical", "comp_tail_bound", "decide", "parse", "parse_poly",
    "sample_costs", "solve_expected_runtime", "synthesize", "validate", "validate_bound",
]
