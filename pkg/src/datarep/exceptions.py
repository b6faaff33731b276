"""Semantic errors and warnings raised across the package.

Public functions raise these instead of bare ValueError so callers can
distinguish bad inputs from genuine computation failures.
"""

from __future__ import annotations


class DatarepError(Exception):
    """Base class for all errors raised by this package."""


# ---------------------------------------------------------------------------
# Input validation
# ---------------------------------------------------------------------------


class ValidationError(DatarepError, ValueError):
    """Inputs violate a documented contract."""


class EmptyDataset(ValidationError):
    """Dataset has too few samples or no features."""


class NonFiniteValue(ValidationError):
    """A NaN or infinite value was found; the message names its position."""


class RaggedRows(ValidationError):
    """Rows of a feature matrix do not all have the same length."""


class InvalidConfig(ValidationError):
    """A configuration object or parameter is out of its valid range."""


class OutOfRangeError(ValidationError):
    """A scalar argument lies outside its documented interval."""


class NonPositiveShape(ValidationError):
    """A Beta shape parameter is zero, negative, or non-finite."""


# ---------------------------------------------------------------------------
# Domain classification
# ---------------------------------------------------------------------------


class ClassifierError(DatarepError):
    """Base class for domain-classifier failures."""


class SingleClassInput(ClassifierError):
    """Training labels contain only one class."""


class TooFewSamplesForFolds(ClassifierError):
    """Not enough samples per class to form the requested folds."""


class SingleClassFold(ClassifierError):
    """No fold assignment with both classes in every training split was
    found after the allowed number of reshuffles."""


# ---------------------------------------------------------------------------
# Distribution fitting
# ---------------------------------------------------------------------------


class FitError(DatarepError):
    """Base class for Beta-fit failures."""


class DegenerateVariance(FitError):
    """All values are equal; a Beta distribution cannot be fitted."""


class TooFewValues(FitError):
    """Fewer values than the minimum required for a stable fit."""


# ---------------------------------------------------------------------------
# Data ingestion
# ---------------------------------------------------------------------------


class IngestError(DatarepError):
    """Base class for file loading and patch extraction failures."""


class ParseError(IngestError):
    """A cell could not be parsed; the message names row and column."""


class EmptyFile(IngestError):
    """The input contains no usable data."""


class UnsupportedFormat(IngestError):
    """The file is not in a supported format."""


class TruncatedFile(IngestError):
    """The file ended before the declared amount of data."""


class ImageTooSmall(IngestError):
    """Image dimensions are smaller than the requested patch size."""


class NoForegroundPixels(IngestError):
    """No patch center lies on a foreground pixel."""


# ---------------------------------------------------------------------------
# Harness / CLI
# ---------------------------------------------------------------------------


class MissingLabels(DatarepError):
    """The condition provides no ground-truth classes for the downstream
    comparison."""


class ModalityMismatch(DatarepError):
    """The two inputs are not of the same modality (both CSV files or both
    image directories)."""


# ---------------------------------------------------------------------------
# Warnings
# ---------------------------------------------------------------------------


class NonConvergenceWarning(UserWarning):
    """The iterative solver hit its iteration cap; the result is still
    returned together with the final gradient norm."""


class FitFallbackWarning(UserWarning):
    """The Beta fit did not reach the Newton tolerance; a method-of-moments
    or partially refined estimate was returned instead."""
