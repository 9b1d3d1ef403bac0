"""Exception hierarchy.

Every error raised by the toolkit derives from :class:`SarimaError`; the
``exit_code`` attribute is what the command-line front end returns.
"""


class SarimaError(Exception):
    exit_code = 1


class ArgumentError(SarimaError, ValueError):
    """Bad argument values (usage problems)."""

    exit_code = 2


class DataError(SarimaError, ValueError):
    exit_code = 3


class DomainError(DataError):
    """A value lies outside the domain of a transform or statistic."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class LengthError(DataError):
    pass


class ShapeError(DataError):
    pass


class AlignmentError(DataError):
    """Calendar mismatch between two series."""


class IngestError(DataError):
    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class DegenerateError(DataError):
    """Zero variance or zero range where a spread is required."""


class NumericError(SarimaError, ArithmeticError):
    exit_code = 4


class RankError(NumericError):
    pass


class ValidityError(NumericError):
    """Coefficients outside the stationary / invertible region."""


class ConditioningError(NumericError):
    pass


class ConvergenceError(NumericError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class NoAdmissibleModel(SarimaError):
    exit_code = 5

    def __init__(self, message, results=None):
        super().__init__(message)
        self.results = results or []
