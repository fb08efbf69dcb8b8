"""Exception hierarchy shared by all modules."""


class GapError(Exception):
    """Base class for library errors."""


class DomainError(GapError, ValueError):
    """Argument outside the supported domain."""


class SingularPointError(GapError):
    """Evaluation at a point where the kernel is infinite."""


class NumericError(GapError, ArithmeticError):
    """Non-finite values or a singular linear system."""


class AccuracyError(GapError):
    """Series truncation too large at the requested coordinate."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class IntegrationFailure(GapError):
    """Monitored invariant drifted beyond its tolerance."""


class StiffnessError(IntegrationFailure):
    """Step size underflow in the adaptive integrator."""


class BranchError(GapError):
    """Negative radicand where a real square root is required."""


class RouteValidityError(DomainError):
    """Parameters for which a gap route is not defined."""


class PoleDetected(GapError):
    """A Hamiltonian flow ran into a movable pole."""

    def __init__(self, message, location=None, partial=None):
        super().__init__(message)
        self.location = location
        self.partial = partial


class SingularTimeError(DomainError):
    """Hamiltonian vector field requested at time zero."""


class DegenerateRecoveryError(GapError):
    """Canonical variables cannot be recovered (vanishing denominator)."""


class TransformSingularError(GapError):
    """A Backlund transformation hit a zero denominator."""


class InvariantError(GapError):
    """Stored Hamiltonian inconsistent with the canonical variables."""


class InterpolationError(DomainError):
    """Dense output requested outside the integrated range."""
