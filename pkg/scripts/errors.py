"""Exception hierarchy shared by every SalamNET module.

Each class carries the exit code the command-line entry point reports for it:
1 for configuration problems, 2 for data problems, 3 for numeric failures.
"""
from typing import Optional


class SalamNetError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ConfigError(SalamNetError):
    """Invalid configuration value, unknown key or missing input path."""

    exit_code = 1


class DataError(SalamNetError):
    """Input data violates a format or content contract."""

    exit_code = 2


class ParseError(DataError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class LabelError(ParseError):
    pass


class UniquenessError(DataError):
    pass


class SplitError(DataError):
    pass


class RebalanceError(DataError):
    pass


class FitError(DataError):
    pass


class FormatError(ParseError):
    """Malformed embedding, TF-IDF or checkpoint file."""


class DimensionError(DataError):
    pass


class TrainingError(DataError):
    pass


class PredictionError(DataError):
    pass


class EvaluationError(DataError):
    pass


class AnalysisError(DataError):
    pass


class NumericError(SalamNetError):
    """Non-finite loss or gradient."""

    exit_code = 3

    def __init__(self, message: str, epoch: Optional[int] = None):
        self.epoch = epoch
        super().__init__(f"epoch {epoch}: {message}" if epoch is not None else message)
