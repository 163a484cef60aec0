"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures onto
the documented statuses: 2 for bad input data, 3 when the working
precision is too low to decide, 4 when a checked property is violated.
"""

from __future__ import annotations


class ClfaError(Exception):
    exit_code = 2


class DataError(ClfaError):
    exit_code = 2


class PrecisionError(ClfaError):
    exit_code = 3


class PropertyViolation(ClfaError):
    exit_code = 4


class NoSolution(DataError):
    """The right-hand side is not in the column space."""


class NotSpanned(DataError):
    def __init__(self, degree: int, message: str | None = None):
        self.degree = degree
        super().__init__(message or f"principal parts do not span in degree {degree}")


class NotUnit(DataError):
    pass


class NotSubspace(DataError):
    pass


class NotPermissible(DataError):
    pass


class NotCentral(DataError):
    pass


class NotNilpotentModM(DataError):
    pass


class DomainNotAsserted(DataError):
    pass


class HypothesisNotMet(DataError):
    pass


class BadParams(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(f"{line}:{column}: {message}" if line else message)


class PrecisionTooLow(PrecisionError):
    pass


class CapTooLow(PrecisionError):
    pass


class VerificationFailed(PropertyViolation):
    pass
