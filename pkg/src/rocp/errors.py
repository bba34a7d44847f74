"""Exception hierarchy.

Every error raised by the package derives from :class:`RocpError`. The
subclasses of :class:`InputError` signal bad user input (CLI exit code 2);
everything else is a runtime or numerical failure (CLI exit code 3).
"""

from __future__ import annotations


class RocpError(Exception):
    """Base class for all package errors."""


class InputError(RocpError, ValueError):
    """Invalid input or configuration."""


class EmptySeries(InputError):
    pass


class NonFiniteValue(InputError):
    def __init__(self, index: int):
        super().__init__(f"non-finite value at index {index}")
        self.index = index


class NonMonotoneTimestamps(InputError):
    def __init__(self, index: int):
        super().__init__(f"timestamps not strictly increasing at index {index}")
        self.index = index


class InsufficientScores(InputError):
    def __init__(self, needed: int, available: int):
        super().__init__(f"need at least {needed} score records, have {available}")
        self.needed = needed
        self.available = available


class SeriesTooShort(InputError):
    def __init__(self, needed: int, available: int):
        super().__init__(f"series too short: need {needed} observations, have {available}")
        self.needed = needed
        self.available = available


class HistoryTooShort(SeriesTooShort):
    pass


class WindowTooLarge(InputError):
    def __init__(self, m: int, available: int):
        super().__init__(f"window m={m} exceeds the {available} available scores")
        self.m = m
        self.available = available


class MissingSigma(InputError):
    def __init__(self, origin: int):
        super().__init__(f"score at origin {origin} carries no volatility estimate")
        self.origin = origin


class ScaledSetRequiresSigma(InputError):
    pass


class NonPositiveSigma(InputError):
    pass


class EmptyInput(InputError):
    pass


class TooFewObservations(InputError):
    pass


class DegenerateGrid(InputError):
    pass


class InvalidExponent(InputError):
    pass


class InvalidDensityBounds(InputError):
    pass


class InvalidSpec(InputError):
    pass


class TooFewRows(InputError):
    pass


class TooFewGroups(InputError):
    pass


class SingularDesign(RocpError):
    """Collinear regressors or zero residual variance."""


class RankDeficient(SingularDesign):
    pass


class OptimizerDiverged(RocpError):
    pass


class NumericOverflow(RocpError, ArithmeticError):
    pass


class FitFailure(RocpError):
    """A model fit failed at a particular rolling origin."""

    def __init__(self, origin: int, cause: Exception):
        super().__init__(f"fit failed at origin {origin}: {cause}")
        self.origin = origin
        self.cause = cause


class ExperimentFailed(RocpError):
    """Every replicate of a scaling experiment failed."""
