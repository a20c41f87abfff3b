"""
Error hierarchy shared by every module of the toolkit.
"""

from typing import Any, Optional, Tuple


class RelSmoothError(Exception):
    """Base class for all toolkit errors."""


class DomainViolationError(RelSmoothError, ValueError):
    """A point lies outside the domain (or its interior) an oracle requires."""


class DomainMismatchError(RelSmoothError, ValueError):
    """Two oracles that must share a domain do not."""


class DimensionMismatchError(RelSmoothError, ValueError):
    """Array shapes are inconsistent."""


class ConfigurationError(RelSmoothError, ValueError):
    """Invalid parameter or configuration value."""


class PreconditionError(ConfigurationError):
    """An operation was called outside the range where its result is valid."""


class NumericalError(RelSmoothError, ArithmeticError):
    """A numerical routine could not produce a trustworthy result."""


class BracketingError(NumericalError):
    """No sign change found while expanding a root bracket."""


class NonConvergenceError(NumericalError):
    """Tolerance not reached; carries the last residual and, for root finding, the last bracket."""

    def __init__(self, message: str, residual: float, bracket: Optional[Tuple[float, float]] = None):
        where = f", last bracket [{bracket[0]:.17g}, {bracket[1]:.17g}]" if bracket is not None else ""
        super().__init__(f"{message} (last residual {residual:.3e}{where})")
        self.residual = residual
        self.bracket = bracket


class SingularMatrixError(NumericalError):
    """Factorization failed; carries the offending pivot (1-based, LAPACK convention)."""

    def __init__(self, message: str, pivot: Optional[int] = None):
        suffix = f" at pivot {pivot}" if pivot is not None else ""
        super().__init__(f"{message}{suffix}")
        self.pivot = pivot


class UnboundedDualError(NumericalError):
    """The one-dimensional dual of a radial subproblem has no finite maximizer."""


class SubproblemError(RelSmoothError):
    """A reference subproblem failed."""


class SubproblemUnavailableError(SubproblemError):
    """The reference has no subproblem solver for this configuration."""


class HessianUnavailableError(RelSmoothError):
    """No analytic Hessian and finite differences are unreliable."""


class SolverAbortedError(RelSmoothError):
    """A solver stopped early; carries the partial trace recorded so far."""

    def __init__(self, message: str, trace: Any = None):
        super().__init__(message)
        self.trace = trace


class SpecParseError(RelSmoothError, ValueError):
    """A problem spec could not be parsed; carries line and column when known."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.line = line
        self.column = column
