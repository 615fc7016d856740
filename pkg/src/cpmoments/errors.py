"""Exception hierarchy shared across the package."""


class CpmError(Exception):
    """Base class for all package errors."""


class DomainError(CpmError, ValueError):
    """Inputs outside an operation's mathematical domain."""


class HorizonError(CpmError, LookupError):
    """A truncated moment list was asked beyond its declared horizon."""


class TruncatedModelError(CpmError):
    """The operation needs the full generating-function series, which a
    truncated (custom) model cannot supply."""


class SaddleError(CpmError, ArithmeticError):
    """The tilt equation u * H'(u) = target has no reachable solution."""
