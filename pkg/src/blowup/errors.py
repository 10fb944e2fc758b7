"""Exception types shared across the package."""


class BlowupError(Exception):
    """Base class for all package errors."""


class DomainError(BlowupError, ValueError):
    """A function was evaluated outside its admissible domain."""


class NonGeometricGridError(BlowupError, ValueError):
    """Limit estimation requires a geometric grid of abscissae."""


class UnbracketableError(BlowupError, RuntimeError):
    """Bracket expansion exceeded its bound without enclosing the target."""


class MonotonicityError(BlowupError, ValueError):
    """Samples of a supposedly monotone map were found out of order."""


class IntegrabilityError(BlowupError, ValueError):
    """An upper-tail integral does not converge.

    The upper-tail ratio form needs j < -(q+1), or an integrable tail
    x^{-(q+1)} Z(x) in the borderline case j = -(q+1).
    """


class QuadratureError(BlowupError, RuntimeError):
    """Adaptive quadrature failed to converge or met a non-finite sample."""


class InconsistentWeightError(BlowupError, ValueError):
    """A weight violates the structural constraints of the admissible class."""


class InvalidRepresentationError(BlowupError, ValueError):
    """Constructor inputs do not define a member of the intended class."""


class ClassificationError(BlowupError, ValueError):
    """A declared class tag is inconsistent with the measured behavior."""


class A1ViolationError(BlowupError, ValueError):
    """f(u)/u failed the sampled monotonicity requirement."""


class PreconditionError(BlowupError, ValueError):
    """An operation was invoked outside its stated preconditions."""


class CaseMismatchError(BlowupError, ValueError):
    """Inputs do not match any admissible expansion sub-case."""


class NonconvergenceError(BlowupError, RuntimeError):
    """An iterative solver exhausted its budget without converging."""


class InconclusiveError(BlowupError, RuntimeError):
    """A verification could not resolve the quantity it was asked to check."""


class UnsupportedGeometryError(BlowupError, ValueError):
    """The requested geometry is not supported by this operation."""


class ConfigError(BlowupError, ValueError):
    """Configuration text failed to parse or validate."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
