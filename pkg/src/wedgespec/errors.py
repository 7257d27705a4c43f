class WedgespecError(Exception):
    """Base class for library errors."""


class DomainError(WedgespecError, ValueError):
    """An argument lies outside the operation's domain."""


class PreconditionError(WedgespecError, ValueError):
    pass


class NumericError(WedgespecError, ArithmeticError):
    """A numerical procedure failed to converge or lost accuracy."""


class DegenerateSpectrumError(NumericError):
    pass
