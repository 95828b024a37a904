"""Exception hierarchy for the affinebody package."""


class AffineBodyError(Exception):
    """Base class for all package-specific errors."""


class DomainError(AffineBodyError):
    """A chart point lies outside the declared open domain of the chart."""


class SingularMetricError(AffineBodyError):
    """The metric tensor is not invertible at the requested point."""


class SingularFrameError(AffineBodyError):
    """A frame (or internal configuration) matrix is singular or has det <= 0."""


class SingularInertiaError(AffineBodyError):
    """The micromaterial inertia tensor is not symmetric positive definite."""


class MetricityError(AffineBodyError):
    """The connection fails to be metric-compatible beyond tolerance."""


class ConstraintViolationError(AffineBodyError):
    """A constrained state violates its constraint beyond tolerance."""


class UnknownObservableError(AffineBodyError):
    """An identifier does not name a member of the canonical observable set."""


class UnboundMotionError(AffineBodyError):
    """An action integral has no real turning points (motion is unbound)."""


class QuadratureError(AffineBodyError):
    """Adaptive quadrature of a loop integral failed to converge."""


class RegimeError(AffineBodyError):
    """Closed-form action constants lie outside the admissible regime."""


class RootFindError(AffineBodyError):
    """Numerical inversion of an action-variable relation failed."""


class DegenerateDeformationError(AffineBodyError):
    """Deformation coordinates hit x = 0 or y = 0 where the model degenerates."""


class SchemaError(AffineBodyError):
    """A trajectory record lacks fields required by the requested analysis."""


class StepFailure(AffineBodyError):
    """A time step could not be completed; carries the failing time."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class ParseError(AffineBodyError):
    """Scenario config text could not be parsed; carries line/key context."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class ValidationError(AffineBodyError):
    """Scenario config parsed but failed validation; carries all failures."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
