"""
Custom exceptions for the image-set-filter package.

This module defines all custom exceptions used throughout the package,
providing clear error hierarchies and specific error types for different scenarios.
"""

from typing import Any


class ImageSetFilterError(Exception):
    """Base exception for all image-set-filter errors."""


class ConfigurationError(ImageSetFilterError):
    """Raised when there is an issue with configuration settings."""


class ValidationError(ImageSetFilterError):
    """Raised when data validation fails."""


class InvalidDataError(ValidationError):
    """Raised when input data is invalid or missing required fields."""


class DimensionMismatchError(ValidationError):
    """Raised when an array does not match the dimension of a set or model."""


class InvalidSetError(ValidationError):
    """Raised when a set violates its construction invariants."""


class ModelError(ImageSetFilterError):
    """Raised when a system model cannot be built or evaluated."""


class ExpressionSyntaxError(ModelError):
    """Raised when expression text does not follow the grammar."""

    def __init__(
        self,
        message: str,
        line: int,
        column: int,
        expected: frozenset[str] = frozenset(),
    ):
        self.line = line
        self.column = column
        self.expected = expected
        detail = f"{message} at line {line}, column {column}"
        if expected:
            detail += f" (expected one of: {', '.join(sorted(expected))})"
        super().__init__(detail)


class UnknownIdentifierError(ExpressionSyntaxError):
    """Raised when an expression names an unknown variable or function."""


class ArityError(ExpressionSyntaxError):
    """Raised when a function is called with the wrong number of arguments."""


class ModelDomainError(ModelError):
    """Raised when an expression is evaluated outside its domain."""

    def __init__(
        self,
        message: str,
        component: str | None = None,
        subexpression: str | None = None,
        sample_index: int | None = None,
        step: int | None = None,
    ):
        self.component = component
        self.subexpression = subexpression
        self.sample_index = sample_index
        self.step = step
        super().__init__(message)


class CalculationError(ImageSetFilterError):
    """Raised when a numerical computation fails."""


class SolverError(CalculationError):
    """Raised when a convex solver does not return an optimal solution."""

    def __init__(self, message: str, report: Any = None):
        self.report = report
        super().__init__(message)


class DegenerateDataError(CalculationError):
    """Raised when a point cloud stays degenerate after regularization."""


class SamplingError(ImageSetFilterError):
    """Raised when samples cannot be generated."""


class AcceptanceRateError(SamplingError):
    """Raised when rejection sampling accepts too few points."""


class FittingError(ImageSetFilterError):
    """Raised when a set cannot be fitted to a point cloud."""


class PointsOutsideDomainError(FittingError):
    """Raised when PAS construction points fall outside the bounding box."""

    def __init__(self, message: str, offenders: list[int], suggested_box: Any = None):
        self.offenders = offenders
        self.suggested_box = suggested_box
        super().__init__(message)


class FilterError(ImageSetFilterError):
    """Raised when the prediction-correction filter cannot continue."""

    def __init__(self, message: str, trace: Any = None):
        self.trace = trace
        super().__init__(message)


class MeasurementInconsistentError(FilterError):
    """Raised when every propagated sample is rejected by a measurement."""

    def __init__(self, message: str, record: Any = None, trace: Any = None):
        self.record = record
        super().__init__(message, trace=trace)


class DataLoadError(ImageSetFilterError):
    """Raised when there is an error loading data files."""


class ProcessingError(ImageSetFilterError):
    """Raised when a pipeline run fails."""
