"""
Exception hierarchy shared by every hybridvol module.

Each exception carries the process exit code the CLI returns when it escapes a command.
"""

from datetime import date
from typing import Any, Dict, Optional

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_CONVERGENCE = 4
EXIT_INTERNAL = 5


class HybridVolError(Exception):
    """Root of the hybridvol exceptions."""

    exit_code: int = EXIT_INTERNAL


class ConfigError(HybridVolError):
    """Invalid, missing, or unknown configuration."""

    exit_code = EXIT_CONFIG


class ConstraintError(ConfigError, ValueError):
    """Model parameters or distribution settings violate their constraints."""


class DomainError(HybridVolError, ValueError):
    """A probability level or similar argument lies outside its domain."""

    exit_code = EXIT_CONFIG


class DataError(HybridVolError):
    """Base of all input-data problems."""

    exit_code = EXIT_DATA


class SchemaError(DataError):
    """A required column is missing from an input file."""


class DataIntegrityError(DataError):
    """A price record violates the OHLC invariants."""

    def __init__(self, message: str, row: Optional[int] = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class DuplicateDateError(DataError):
    """The same date appears more than once."""

    def __init__(self, duplicated: Any):
        super().__init__(f"duplicate date {duplicated}")
        self.date = duplicated


class InsufficientDataError(DataError):
    """Too few observations for the requested operation."""


class DegenerateScaleError(DataError):
    """A scaling denominator is zero."""


class AlignmentError(DataError):
    """Two series that must share dates or lengths do not."""


class InsufficientExceedancesError(DataError):
    """An exceedance-based test received too few exceedances."""


class ShapeError(HybridVolError, ValueError):
    """Array dimensions do not match the network layout."""


class NumericOverflowError(HybridVolError, ArithmeticError):
    """A variance recursion produced a non-finite value."""

    exit_code = EXIT_CONVERGENCE

    def __init__(self, message: str, at: Optional[date] = None):
        super().__init__(message if at is None else f"{message} at {at}")
        self.date = at


class ConvergenceError(HybridVolError):
    """Base of estimation failures."""

    exit_code = EXIT_CONVERGENCE


class GarchConvergenceError(ConvergenceError):
    """Every starting point of a GARCH fit failed."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class GruDivergenceError(ConvergenceError):
    """GRU training produced a non-finite loss."""

    def __init__(self, epoch: int, value: float):
        super().__init__(f"non-finite loss {value} at epoch {epoch}")
        self.epoch = epoch


class DegenerateTestError(HybridVolError, ValueError):
    """A test statistic is undefined for the given input."""
