"""Exception types raised across the package.

Everything derives from LoftuneError so callers (and the CLI) can catch one
base class; the leaf types carry the structured fields named in their
docstrings.
"""

from __future__ import annotations


class LoftuneError(Exception):
    """Base class for all errors raised by this package."""


# ---------------------------------------------------------------- datasets


class DatasetError(LoftuneError):
    """Invalid input data."""


class EmptyDataset(DatasetError):
    """No rows, or rows of width zero."""


class RaggedRows(DatasetError):
    """Rows do not all share the same dimension."""

    def __init__(self, row: int, expected: int, got: int):
        self.row = row
        self.expected = expected
        self.got = got
        super().__init__(
            f"row {row} has {got} values, expected {expected} like row 0"
        )


class NonFiniteValue(DatasetError):
    """A NaN/inf (or unparseable) entry at (row, col)."""

    def __init__(self, row: int, col: int):
        self.row = row
        self.col = col
        super().__init__(f"non-finite value at row {row}, column {col}")


# ------------------------------------------------------------- persistence


class IoFailure(LoftuneError):
    """Underlying file read/write failed."""


class DeserializeFailure(LoftuneError):
    """Model file is not parseable; offset is a byte position when known."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)


class InvariantViolation(LoftuneError):
    """A loaded or constructed object breaks its documented invariants."""


# ---------------------------------------------------------------- knn / lof


class DimensionMismatch(LoftuneError):
    """Query/data dimension does not match what the structure was built for."""


class KTooLarge(LoftuneError):
    """Requested neighbor count exceeds what the point set can provide."""


class KOutOfRange(LoftuneError):
    """Neighborhood size outside [1, n-1]."""


# ------------------------------------------------------------------ tuner


class InvalidGrid(LoftuneError):
    """TuningGrid sequences malformed (empty, unordered, out of range)."""


class ContaminationTooSmall(LoftuneError):
    """floor(c*n) < 2: not enough points per block."""


class ContaminationTooLarge(LoftuneError):
    """2*floor(c*n) > n: outlier and inlier blocks would overlap."""


class GridInfeasible(LoftuneError):
    """A grid value cannot be used with the given dataset size."""

    def __init__(self, contamination: float, n: int, reason: str):
        self.contamination = contamination
        self.n = n
        super().__init__(
            f"contamination {contamination} infeasible for n={n}: {reason}"
        )


# ----------------------------------------------------------------- numerics


class InvalidParams(LoftuneError):
    """Distribution parameters out of domain (df <= 0 or non-finite input)."""


class NonPositiveValue(LoftuneError):
    """Logarithm requested of a value <= 0."""


class TooFewValues(LoftuneError):
    """At least two values are needed for a sample variance."""


# ---------------------------------------------------------------- metrics


class LengthMismatch(LoftuneError):
    """Paired sequences have different lengths."""


class OneClassOnly(LoftuneError):
    """ROC AUC needs at least one positive and one negative label."""


# ------------------------------------------------------------ cli / data io


class UnknownGenerator(LoftuneError):
    """Benchmark generator name not recognized."""


class InvalidDims(LoftuneError):
    """Projection dimensions out of range (need 1 <= d <= p)."""


class CsvParseError(LoftuneError):
    """CSV cell or row malformed; line is 1-based."""

    def __init__(self, path: str, line: int, message: str):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")
