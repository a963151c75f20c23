"""Exception types shared across the package."""


class CmechError(Exception):
    """Base class for all package-specific errors."""


class ExpressionParseError(CmechError):
    """Raised on malformed expression source; carries the offending position."""

    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class EvaluationError(CmechError):
    """Numeric evaluation failed (division by zero, bad power, ...)."""


class UnboundParameterError(EvaluationError, KeyError):
    """An expression referenced a parameter with no bound value."""

    def __init__(self, name):
        self.name = name
        super().__init__(f"unbound parameter: {name!r}")

    def __str__(self):
        # KeyError would repr() the message otherwise.
        return self.args[0]


class ComplexHamiltonianError(CmechError):
    """An operation restricted to real Hamiltonians received a complex one."""


class IntegrationError(CmechError):
    """Numerical integration failed."""


class NonFiniteStateError(IntegrationError):
    def __init__(self, step_index, time):
        self.step_index = step_index
        self.time = time
        super().__init__(f"non-finite state at step {step_index} (t={time})")


class StepUnderflowError(IntegrationError):
    def __init__(self, time):
        self.time = time
        super().__init__(f"step size underflow; integration reached t={time}")


class OpenCurveError(CmechError):
    """A closed-curve quantity was requested for an open curve."""


class NonConvexCurveError(CmechError):
    """A convex-curve bound was requested for a non-convex curve."""


class NonlinearityError(CmechError):
    """Operator extraction requires an affine field; names the offender."""


class ConfigError(CmechError):
    """Invalid or incomplete run configuration."""
