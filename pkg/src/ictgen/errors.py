"""Exception hierarchy shared by every ictgen module."""


class IctgenError(Exception):
    pass


class ConfigurationError(IctgenError, ValueError):
    """Invalid distribution parameters or simulation configuration."""


class CalibrationError(IctgenError):
    """No per-pair parameters reproduce the requested encounter count."""


class AssemblyError(IctgenError):
    """A pair schedule violates the trace invariants."""


class QueryError(IctgenError, ValueError):
    pass


class ParseError(IctgenError, ValueError):
    """Malformed trace or config file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ContactImportError(IctgenError, ValueError):
    pass


class EmptyDistributionError(IctgenError, ValueError):
    pass


class ComparisonError(IctgenError, ValueError):
    pass


class InsufficientDataError(IctgenError, ValueError):
    pass
