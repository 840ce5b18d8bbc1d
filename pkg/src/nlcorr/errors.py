"""Exception hierarchy shared by all modules."""


class NlcError(Exception):
    """Base class for errors raised by nlcorr."""


class ValidationError(NlcError, ValueError):
    """Input violates a documented precondition."""


class ParseError(ValidationError):
    """Malformed input file. ``row`` and ``column`` are 1-based when known."""

    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column


class InsufficientDataError(ValidationError):
    """Not enough observations for the requested operation."""


class DegenerateInputError(ValidationError):
    """Zero-variance series where a non-degenerate one is required."""

    def __init__(self, message, ticker=None):
        super().__init__(message)
        self.ticker = ticker


class NumericError(NlcError, ArithmeticError):
    """Numerical procedure failed to produce a usable result."""
