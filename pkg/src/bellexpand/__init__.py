"""Multipartite Bell expressions, GHZ strategy simulation and randomness bounds."""

from __future__ import annotations

from .bellexpr import BellFunctional, CorrelatorExpression, evaluate, expand, facet, local_bound, mabk
from .errors import BellExpandError
from .qstate import Behavior, Strategy, behavior

__version__ = "0.1.0"

__all__ = [
    "Behavior",
    "BellExpandError",
    "BellFunctional",
    "CorrelatorExpression",
    "Strategy",
    "behavior",
    "evaluate",
    "expand",
    "facet",
    "local_bound",
    "mabk",
]
