"""Exception hierarchy shared across the package."""


class ContractError(ValueError):
    """An input violates a documented precondition or invariant."""


class NumericalError(RuntimeError):
    """A numerical routine failed (e.g. SVD non-convergence)."""


class ParseError(ValueError):
    """A file could not be parsed; carries row/column location when known."""

    def __init__(self, message, row=None, col=None):
        loc = ""
        if row is not None:
            loc = f" (row {row}" + (f", column {col}" if col is not None else "") + ")"
        super().__init__(message + loc)
        self.row = row
        self.col = col


class AmbiguityError(ContractError):
    """Tied singular values make a type boundary ill-defined."""
