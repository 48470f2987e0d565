"""Exception types shared across the package."""


class BranchflowError(Exception):
    """Base class for all branchflow errors."""


class ValidationError(BranchflowError):
    """Invalid input: bad gate indices, overlapping gates, malformed matrices."""


class ResourceLimitError(BranchflowError):
    """A requested computation exceeds the configured size cap."""


class TimeTagError(ValidationError):
    """Two e-numbers with different time tags were combined without retiming."""


class ParseError(ValidationError):
    """Syntax or semantic error in a circuit document, with source location."""

    def __init__(self, message: str, line: int, column: int, token: str = ""):
        self.line = line
        self.column = column
        self.token = token
        shown = f" {token!r}" if token else ""
        super().__init__(f"line {line}, column {column}:{shown} {message}")
