"""Exception types shared across more than one module.

Module-specific errors (parse errors, SQL errors, ...) live next to the
code that raises them; only the base class and the handful of exceptions
raised from several places are collected here.
"""


class RailEstateError(Exception):
    """Base class for all errors raised by this package."""


class InvariantViolation(RailEstateError):
    """A row or value breaks a documented data invariant."""

    def __init__(self, row: object, reason: str):
        self.row = row
        self.reason = reason
        super().__init__(f"{reason}: {row!r}")


class InsufficientData(RailEstateError):
    """A computation needs more observations than were supplied."""
