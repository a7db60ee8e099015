"""Exception types shared across the package."""


class FisurfError(Exception):
    """Base class for all errors raised by this package."""


class ExprError(FisurfError):
    """Base for expression parsing/evaluation failures.

    Carries the byte offset into the source text where the problem was
    detected (0-based).
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.message = message
        self.offset = offset


class ExprSyntaxError(ExprError):
    pass


class ExprDomainError(ExprError):
    pass


class GridFormatError(FisurfError):
    """Malformed grid table; row/column are 1-based positions in the file."""

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        loc = ""
        if row is not None:
            loc = f" (row {row}" + (f", column {col})" if col is not None else ")")
        super().__init__(message + loc)
        self.row = row
        self.col = col


class ValidationError(FisurfError):
    """A constructed object violates its stated constraints."""


class LatticeBudgetError(ValidationError):
    """Requested lattice would exceed the memory budget."""


class BorderMismatchError(ValidationError):
    """Overlapping lattice writes from adjacent cells disagree."""
