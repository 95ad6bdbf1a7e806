"""Exception hierarchy shared by all modules."""


class HypStabError(Exception):
    """Base class for toolkit errors."""


class InvalidInput(HypStabError, ValueError):
    """Arguments violate an operation's preconditions."""


class DomainError(HypStabError, ValueError):
    """A point or stencil falls outside a patch domain."""


class NumericalFailure(HypStabError, ArithmeticError):
    """Degenerate metric, eigensolver breakdown and similar."""


class PreconditionViolation(HypStabError):
    """Geometric hypothesis of a check is not met on the data.

    ``details`` carries the observed quantities so callers can report
    them instead of crashing.
    """

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class UnsupportedPrecision(HypStabError):
    """Requested quantity needs analytic derivatives the patch cannot supply."""
