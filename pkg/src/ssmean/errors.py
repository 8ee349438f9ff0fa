"""Exception types shared across the package.

``EstimationError`` subclasses signal estimator precondition or numerical
failures (CLI exit code 2); ``CsvError`` subclasses signal input-file
problems (CLI exit code 1).
"""

from __future__ import annotations


class EstimationError(Exception):
    """Base class for estimator precondition and numerical failures."""


class DimensionMismatch(EstimationError):
    """Inputs whose shapes cannot be combined."""


class RankDeficient(EstimationError):
    """Numerically singular design matrix."""

    def __init__(self, message: str, condition_estimate: float = float("inf")):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class InsufficientData(EstimationError):
    """Too few rows for the requested computation."""


class MissingMu(EstimationError):
    """The ideal-setting estimator needs the known covariate mean."""


class InvalidArgs(EstimationError):
    """Arguments outside the operation's domain."""


class DimensionOverflow(EstimationError):
    """Basis augmentation would leave too few degrees of freedom."""


class InvalidSpec(EstimationError):
    """Malformed simulation specification."""


class CsvError(Exception):
    """Base class for CSV ingestion failures."""


class MissingColumn(CsvError):
    """A required column is absent from the header."""


class ColumnMismatch(CsvError):
    """Unlabeled-file columns do not match the labeled file's covariates."""


class EmptyFile(CsvError):
    """The file has no header or no data rows where rows are required."""


class ParseError(CsvError):
    """Non-numeric or missing cells; carries the first offending row/column."""

    def __init__(self, message: str, row: int | None = None, col: str | None = None):
        super().__init__(message)
        self.row = row
        self.col = col
