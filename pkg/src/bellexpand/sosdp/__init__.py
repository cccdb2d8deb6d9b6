"""SOS / SDP upper bounds on Bell functionals at fixed randomness."""

from .program import (
    BRANCHES,
    SdpProblem,
    SdpSolution,
    assemble,
    certificate_error,
    epsilon_for_rate,
    solve,
    sos_upper_bound,
    tradeoff_upper,
)
from .words import Word, canonical_reduce, monomial_basis

__all__ = [
    "BRANCHES",
    "SdpProblem",
    "SdpSolution",
    "Word",
    "assemble",
    "canonical_reduce",
    "certificate_error",
    "epsilon_for_rate",
    "monomial_basis",
    "solve",
    "sos_upper_bound",
    "tradeoff_upper",
]
