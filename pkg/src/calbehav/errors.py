from __future__ import annotations

from dataclasses import dataclass


class CalBehavError(Exception):
    """Base class for library errors."""


class ContractViolation(CalBehavError, ValueError):
    """An operation was called outside its precondition."""


class FormatError(CalBehavError):
    """Input is structurally unusable (e.g. a required CSV column is missing)."""


class InvariantViolation(CalBehavError):
    """An internal consistency check failed; indicates a bug, not bad input."""


@dataclass(frozen=True)
class Diagnostic:
    """A recoverable ingestion problem: the offending block or row was skipped."""

    kind: str
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.kind}: {self.message}"
