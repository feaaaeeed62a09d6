"""Exception hierarchy. CLI exit codes key off these classes."""


class GenFVTError(Exception):
    """Base class for all library errors."""


class ConfigError(GenFVTError, ValueError):
    """Invalid parameters: out-of-range orders, malformed policies or ladders."""


class DataError(GenFVTError, ValueError):
    """Invalid input data: non-finite samples, non-uniform grids, empty input."""


class DomainError(GenFVTError, ValueError):
    """A point outside the domain of the operation."""


class PreconditionError(GenFVTError, ValueError):
    """The operation's input does not satisfy its stated precondition."""


class InconclusiveError(GenFVTError):
    """The data do not support any verdict, e.g. a horizon that is too short."""


class UnsupportedSpecError(GenFVTError, TypeError):
    """No closed form is available for the requested signal family."""


class AccuracyError(GenFVTError, ArithmeticError):
    """A numerical estimate could not be brought within its tolerance."""
