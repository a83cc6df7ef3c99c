"""Exception types raised across the package.

Three families map onto CLI exit codes: ``DataError`` (3), ``NumericError``
(4) and ``UsageError`` (2). ``ModelFormatError`` and ``IoError`` count as
data errors.
"""


class PkdError(Exception):
    """Base class for every error raised by pkdnet."""


class UsageError(PkdError, ValueError):
    pass


class DataError(PkdError, ValueError):
    pass


class NumericError(PkdError, ArithmeticError):
    pass


# -- data ---------------------------------------------------------------

class MissingColumn(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyDataset(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class LengthMismatch(DataError):
    pass


class DegenerateClass(DataError):
    pass


class InconsistentInput(DataError):
    pass


class EmptyBatch(DataError):
    pass


class TooFewPoints(DataError):
    pass


class InvalidCounts(DataError):
    pass


class InvalidP(DataError):
    pass


class TargetNotSubset(DataError):
    pass


class EmptySet(DataError):
    pass


class IoError(DataError, OSError):
    pass


class ModelFormatError(DataError):
    pass


class MalformedModel(ModelFormatError):
    pass


class UnsupportedVersion(ModelFormatError):
    pass


# -- usage / configuration ----------------------------------------------

class InvalidFraction(UsageError):
    pass


class ConfigError(UsageError):
    pass


class InvalidArchitecture(UsageError):
    pass


class InvalidHyperparameter(UsageError):
    pass


class InvalidFolds(UsageError):
    pass


class InvalidK(UsageError):
    pass


# -- numeric ------------------------------------------------------------

class NonFiniteLoss(NumericError):
    pass


class StageError(PkdError):
    """Wraps an error raised inside a pipeline stage, keeping the cause."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {type(cause).__name__}: {cause}")
