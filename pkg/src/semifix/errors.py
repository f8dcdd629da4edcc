"""Exception hierarchy shared by all modules."""


class SemifixError(Exception):
    """Base class for all errors raised by semifix."""


class InvalidParameterError(SemifixError, ValueError):
    """A constructor or operation received an out-of-range parameter."""


class DomainError(SemifixError, ValueError):
    """A numeric argument is negative or not finite."""


class FormatError(SemifixError, ValueError):
    """A matrix, JSON document or map table is malformed."""


class UnsupportedError(SemifixError):
    """The requested check cannot run on this kind of space."""


class NotApplicableError(SemifixError):
    """No fixed point theorem covers the given mapping/coefficients.

    ``applicability`` carries the full condition ledger so callers can
    report exactly which side condition failed.
    """

    def __init__(self, message, applicability):
        super().__init__(message)
        self.applicability = applicability


class AuditViolationError(SemifixError):
    """A theorem's hypotheses held on an instance but its conclusion did not."""

    def __init__(self, message, reproduction, path=None):
        super().__init__(message)
        self.reproduction = reproduction
        self.path = path


class ExprSyntaxError(SemifixError, ValueError):
    """Malformed map expression. ``offset`` is a 0-based byte offset."""

    def __init__(self, message, offset, expected=()):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.expected = tuple(sorted(expected))


class ExprEvalError(SemifixError, ArithmeticError):
    """Runtime failure evaluating a map expression (e.g. division by zero)."""
