"""Exception types raised across the package."""


class SpherefdError(Exception):
    """Base class for all package errors."""


class ConfigError(SpherefdError, ValueError):
    """Invalid or contradictory run parameters."""


class InputError(SpherefdError):
    """Problem with user-supplied input data."""


class XyzParseError(InputError, ValueError):
    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class UnknownElementError(InputError, KeyError):
    def __init__(self, symbol, table=""):
        self.symbol = symbol
        self.table = table
        super().__init__(symbol)

    def __str__(self):
        where = f" in {self.table} radii table" if self.table else ""
        return f"unknown element {self.symbol!r}{where}"


class DegenerateGeometryError(InputError, ValueError):
    """Point set too small or flat for the requested geometric construction."""


class NumericError(SpherefdError, ArithmeticError):
    """A fit or count could not be computed from the data."""
