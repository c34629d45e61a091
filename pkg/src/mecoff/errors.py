"""Exception types shared across the package."""

from __future__ import annotations


class MecoffError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(MecoffError):
    """Raised for invalid parameter values or malformed configuration input."""


class InfeasibleAllocationError(MecoffError):
    """Raised when an allocation violates one or more system constraints.

    The ``violations`` attribute carries one human-readable message per
    violated constraint.
    """

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("infeasible allocation: " + "; ".join(self.violations))


class ConvergenceError(MecoffError):
    """Raised when an iterative solver fails to reach its tolerance."""


class InputDataError(MecoffError):
    """Raised for malformed measurement / CSV input."""
