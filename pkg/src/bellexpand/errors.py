"""Exception hierarchy shared by all modules.

The CLI maps these onto process exit codes, so library code should raise the
most specific class that applies.
"""

from __future__ import annotations


class BellExpandError(Exception):
    """Base class for every error raised deliberately by this package."""


class InvalidArgument(BellExpandError, ValueError):
    """An argument violates a documented precondition."""


class OutOfRange(InvalidArgument):
    """A numeric target lies outside the attainable range."""


class ResourceLimit(BellExpandError):
    """A size guard was exceeded (enumeration or dense storage would blow up)."""


class SolverFailure(BellExpandError):
    """An LP or SDP solve did not produce a usable answer."""


class UnsupportedFunctional(InvalidArgument):
    """The functional cannot be written in the word algebra of the SDP relaxation."""


class InternalError(BellExpandError):
    """A consistency check that should never fail did fail."""
