"""Exception types raised by chromasr."""


class ChromaSRError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(ChromaSRError, ValueError):
    pass


class ConfigError(ChromaSRError, ValueError):
    """Invalid run configuration.

    ``fields`` lists the offending configuration keys.
    """

    def __init__(self, message, fields=()):
        super().__init__(message)
        self.fields = tuple(fields)


class NumericalError(ChromaSRError, ArithmeticError):
    pass


class AdmmDivergenceError(NumericalError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class StageError(ChromaSRError):
    """Pipeline failure wrapped with the name of the stage that raised it."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
