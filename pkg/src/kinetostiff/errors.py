"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class StiffnessError(Exception):
    """Base class for every error raised by kinetostiff."""


class InputError(StiffnessError, ValueError):
    """Malformed or out-of-domain arguments (wrong shapes, non-finite values)."""


class DataError(StiffnessError, ValueError):
    """Data that is well-formed but physically inconsistent (asymmetric, indefinite)."""


class StructuralError(StiffnessError, ValueError):
    """A matrix that should have a known structure (skew block, zero row) does not."""


class NumericalError(StiffnessError, ArithmeticError):
    """A linear-algebra step failed, e.g. a matrix that must be inverted is singular.

    Attributes:
        value: offending eigenvalue or singular value, if known.
        direction: offending direction (unit vector), if known.
    """

    def __init__(self, message, value=None, direction=None):
        super().__init__(message)
        self.value = value
        self.direction = direction


class SingularityError(NumericalError):
    """Posture is singular for a solver that cannot handle it."""


class WorkspaceError(StiffnessError):
    """Requested end-effector position is not reachable."""

    def __init__(self, message, chain=None):
        super().__init__(message)
        self.chain = chain


class RegimeError(StiffnessError):
    """A small-motion approximation was applied outside its validity range."""
