"""Exception hierarchy shared across the toolkit."""


class DualminerError(Exception):
    """Base class for all toolkit errors."""


class LogParseError(DualminerError):
    """Raised for malformed log input (XML syntax, bad rows)."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class LogSchemaError(DualminerError):
    """Raised when log input is well-formed but violates the expected schema."""


class LogConfigError(DualminerError):
    """Raised for invalid reader configuration (missing columns etc.)."""


class PredicateError(DualminerError):
    """Raised when a split predicate cannot be evaluated on a trace."""


class TreeSyntaxError(DualminerError):
    """Raised for malformed process-tree text."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class TreeArityError(DualminerError):
    """Raised when an operator node has an illegal number of children."""


class PetriNetError(DualminerError):
    """Raised for structurally invalid nets or illegal firings."""


class PnmlError(DualminerError):
    """Raised for unreadable PNML input."""


class AlignmentBudgetError(DualminerError):
    """Raised when an alignment search exceeds its state budget."""


class UndefinedPrecisionError(DualminerError):
    """Raised when no log prefix can be replayed, leaving precision undefined."""
