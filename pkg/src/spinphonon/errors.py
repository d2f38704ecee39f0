"""Exception hierarchy.

ValidationError maps to CLI exit code 2, NumericalError to exit code 3.
Both derive from ValueError so library callers can catch them generically.
"""


class SpinPhononError(ValueError):
    """Base class for all package errors."""


class ValidationError(SpinPhononError):
    """Invalid input: bad dimensions, domains, file contents or config."""


class DimensionError(ValidationError):
    """Operator/layout dimension mismatch."""


class NumericalError(SpinPhononError):
    """A numerical contract was violated (positivity, trace drift, ...)."""


class PropagationError(NumericalError):
    """Time propagation aborted; carries the offending step index."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step
