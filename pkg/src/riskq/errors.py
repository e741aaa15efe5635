"""Exception hierarchy shared by every module."""


class RiskQError(Exception):
    """Base class for all package errors."""


class DomainError(RiskQError, ValueError):
    """An argument lies outside the domain of an operation."""


class ParameterRangeError(DomainError):
    """Model parameters would overflow the multiplicative weights."""


class NumericError(RiskQError, ArithmeticError):
    """A numerical routine failed to converge or overflowed."""


class InconsistencyError(NumericError):
    """Two routes to the same quantity disagree beyond tolerance."""


class ConvergenceError(NumericError):
    """An iterative solver hit its iteration cap.

    The last iterate and its residual are kept on the exception so callers
    can inspect how far the solver got.
    """

    def __init__(self, message, last_iterate=None, residual=None, report=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual
        self.report = report


class NonThresholdPolicyError(RiskQError, ValueError):
    """A policy is not of the form idle-then-transmit."""

    def __init__(self, violating_states):
        self.violating_states = list(violating_states)
        super().__init__(
            "policy is not threshold-type; idle after first transmit at states "
            f"{self.violating_states}"
        )


class PropertyViolation(RiskQError):
    """A structural property that is expected to hold was found to fail."""
