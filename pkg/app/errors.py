from typing import Optional


class status:
    """Process exit codes"""

    EXIT_OK = 0
    EXIT_USAGE = 1
    EXIT_PARSE = 2
    EXIT_VALIDATION = 3
    EXIT_INVARIANT = 4


class ToolkitError(Exception):
    """Base error; carries the exit status the CLI reports"""

    status_code = status.EXIT_USAGE

    def __init__(self, detail: str, status_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if status_code is not None:
            self.status_code = status_code


class StructuralError(ToolkitError):
    """Arguments violate a structural precondition (sizes, permutations, ranges)"""

    status_code = status.EXIT_USAGE


class LimitExceededError(ToolkitError):
    """An exact oracle was asked to solve an instance above its size limit"""

    status_code = status.EXIT_USAGE


class ParseError(ToolkitError):
    status_code = status.EXIT_PARSE

    def __init__(self, detail: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            detail = f"line {line}: {detail}"
        super().__init__(detail)


class ValidationFailure(ToolkitError):
    """Input rejected: not a semimetric, inconsistent certificate, ..."""

    status_code = status.EXIT_VALIDATION


class InvariantViolation(ToolkitError):
    """A guarantee checked at runtime did not hold"""

    status_code = status.EXIT_INVARIANT
