"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class GTDError(Exception):
    """Base class for errors raised by gtdchem."""


class DomainError(GTDError, ValueError):
    """A state or coordinate lies outside the physically admissible region."""


class ConfigurationError(GTDError, ValueError):
    """Inconsistent or unsupported reaction / model configuration."""


class SingularityError(GTDError, ArithmeticError):
    """The metric degenerates at the requested point.

    ``factor`` names the coordinate whose ``E^a dPhi/dE^a`` factor vanished
    (0 or 1), and ``value`` is the offending factor.
    """

    def __init__(self, message: str, factor: int | None = None, value: float | None = None):
        super().__init__(message)
        self.factor = factor
        self.value = value


class NumericError(GTDError, ArithmeticError):
    """Non-finite intermediate result; ``last_state`` holds the last good state."""

    def __init__(self, message: str, last_state=None):
        super().__init__(message)
        self.last_state = last_state
