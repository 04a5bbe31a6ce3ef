"""Exception types raised across the package."""


class QPerturbError(Exception):
    """Base class for all package errors."""


class ValidationError(QPerturbError):
    """Input failed a structural or numerical validity check.

    For ensemble files the failing record index is carried in ``index``.
    """

    def __init__(self, reason, index=None):
        self.index = index
        self.reason = reason
        if index is not None:
            super().__init__(f"record {index}: {reason}")
        else:
            super().__init__(reason)


class ParseError(QPerturbError):
    """A file could not be parsed; ``record`` names the offending line/record."""

    def __init__(self, reason, record=None):
        self.record = record
        if record is not None:
            super().__init__(f"record {record}: {reason}")
        else:
            super().__init__(reason)


class NotHermitianInput(ValidationError):
    """Operator expected to be Hermitian is not, beyond tolerance."""


class NotPositiveSemidefinite(ValidationError):
    """Operator has an eigenvalue below the accepted clamp window."""


class InvalidBellCoefficients(ValidationError):
    """Bell-diagonal coefficient vector violates its constraints."""


class SolverDiverged(QPerturbError):
    """The multiplier solver did not converge; diagnostics attached."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics
        super().__init__(message)


class NonPhysicalResult(QPerturbError):
    """A result that is positive semi-definite by construction failed the
    PSD check; signals an internal error, never silently fixed."""


class SolverFailureRateExceeded(QPerturbError):
    """Too many diverged solves; signals misconfigured targets."""

    def __init__(self, failures, attempts):
        self.failures = failures
        self.attempts = attempts
        super().__init__(
            f"solver failed {failures} of {attempts} attempts; "
            "targets are likely unreachable from this baseline"
        )
