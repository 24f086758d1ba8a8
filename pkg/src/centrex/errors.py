"""Exception types shared across the package."""


class CentrexError(Exception):
    """Base class for all errors raised by centrex."""


class EdgeListError(CentrexError, ValueError):
    """Malformed or empty edge-list input."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(CentrexError, ValueError):
    """A problem instance violates one or more invariants.

    ``errors`` holds every violation found, not just the first.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class GuardError(CentrexError):
    """An operation refused to run because a size guard was exceeded."""


class SamplingError(CentrexError, RuntimeError):
    """Uncovered-pair sampling could not produce the requested sample."""
