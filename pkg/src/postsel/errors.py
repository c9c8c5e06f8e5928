"""Exception hierarchy shared by every module."""

from __future__ import annotations


class SimulationError(Exception):
    """Base class for all errors raised by postsel."""


class InputError(SimulationError, ValueError):
    """Malformed or out-of-range input to an operation."""


class NullPostselectionError(SimulationError):
    """Postselection on an event whose probability is numerically zero."""

    def __init__(self, probability: float, where: str = "project"):
        self.probability = probability
        self.where = where
        super().__init__(f"{where}: postselection on null event (p = {probability:.3e})")


class CapacityError(SimulationError):
    """The requested register would exceed the simulator's qubit budget."""


class ParseError(InputError):
    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"line {line}, column {column}: {message}")
