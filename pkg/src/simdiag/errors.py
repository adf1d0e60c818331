"""Exception hierarchy shared by every simdiag module."""
from __future__ import annotations

from typing import Any, List, Optional, Tuple


class SimdiagError(Exception):
    """Base class for all library failures."""


class DomainError(SimdiagError, ValueError):
    """Invalid sizes, shapes, parameters or violated preconditions."""


class SingularityError(SimdiagError):
    """A matrix that must be nonsingular is singular at the configured tolerance."""


class JordanUnreliableError(SimdiagError):
    """The real Jordan form could not be certified numerically."""

    def __init__(self, message: str, partial_blocks: Optional[List[Any]] = None, measured: Optional[float] = None):
        super().__init__(message)
        self.partial_blocks = list(partial_blocks or [])
        self.measured = measured


class CanonicalUnreliableError(SimdiagError):
    """A congruence canonical form could not be normalized within tolerance."""

    def __init__(self, message: str, eigenvalue: Any = None, measured: Optional[float] = None):
        super().__init__(message)
        self.eigenvalue = eigenvalue
        self.measured = measured


class NotTwsdBError(SimdiagError):
    """Raised by sequence construction when the block structure rules out TWSD-B."""


class KTooLargeError(SimdiagError):
    """Sequence evaluation overflowed the entry guard."""

    def __init__(self, message: str, k: float, recipe: str):
        super().__init__(message)
        self.k = k
        self.recipe = recipe


class MatrixFileError(SimdiagError):
    """A matrix-set file could not be read or written."""


class ParseError(MatrixFileError):
    """A matrix-set file is malformed."""

    def __init__(self, message: str, line: Optional[int] = None, entry: Optional[Tuple[int, ...]] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
        self.entry = entry


class UsageError(SimdiagError):
    """Conflicting or invalid command-line usage."""
