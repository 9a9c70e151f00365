"""
Price ingestion, log returns, and descriptive statistics.

Series are held in pandas objects indexed by a ``DatetimeIndex`` named ``date``.
Consecutive rows are treated as consecutive trading days; no calendar adjustment is made.
"""

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
from scipy import stats

from ..utils import (DataIntegrityError, DomainError, DuplicateDateError,
                     InsufficientDataError, PipelineLogger, SchemaError)

logger = PipelineLogger.get_logger(__name__)

OHLC_COLUMNS = ("open", "high", "low", "close")
DEFAULT_RETURN_SCALE = 100.0


@dataclass(frozen=True)
class ColumnSchema:
    """
    Mapping from the canonical OHLC field names to the column names of an input file.

    Attributes:
        date (str): Column holding ISO-8601 dates.
        open (str): Column holding opening prices.
        high (str): Column holding the highest prices.
        low (str): Column holding the lowest prices.
        close (str): Column holding closing prices.
    """

    date: str = "date"
    open: str = "open"
    high: str = "high"
    low: str = "low"
    close: str = "close"

    def as_mapping(self) -> dict:
        return {
            self.date: "date",
            self.open: "open",
            self.high: "high",
            self.low: "low",
            self.close: "close",
        }


def _check_ohlc_rows(frame: pd.DataFrame, row_numbers: Optional[np.ndarray] = None) -> None:
    """Raise DataIntegrityError for the first record breaking an OHLC invariant."""
    rows = row_numbers if row_numbers is not None else np.arange(1, len(frame) + 1)
    values = frame[list(OHLC_COLUMNS)].to_numpy(dtype=float)
    o, h, l, c = values.T

    non_finite = ~np.isfinite(values).all(axis=1)
    non_positive = (values <= 0).any(axis=1)
    high_low = h < l
    high_body = h < np.maximum(o, c)
    low_body = l > np.minimum(o, c)

    checks = (
        (non_finite, "non-numeric or missing price"),
        (non_positive, "non-positive price"),
        (high_low, "high below low"),
        (high_body, "high below max(open, close)"),
        (low_body, "low above min(open, close)"),
    )
    for mask, message in checks:
        if mask.any():
            first = int(np.argmax(mask))
            raise DataIntegrityError(message, row=int(rows[first]))


@dataclass(frozen=True)
class PriceSeries:
    """
    Date-ordered OHLC records.

    Attributes:
        frame (pd.DataFrame): Columns ``open, high, low, close`` indexed by strictly
            increasing dates.
    """

    frame: pd.DataFrame

    def __post_init__(self):
        frame = self.frame.loc[:, list(OHLC_COLUMNS)].astype(float).copy()
        frame.index = pd.DatetimeIndex(self.frame.index, name="date")
        if frame.index.has_duplicates:
            raise DuplicateDateError(frame.index[frame.index.duplicated()][0].date())
        if not frame.index.is_monotonic_increasing:
            raise DataIntegrityError("dates are not strictly increasing")
        _check_ohlc_rows(frame)
        object.__setattr__(self, "frame", frame)

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def dates(self) -> pd.DatetimeIndex:
        return self.frame.index

    @property
    def open(self) -> pd.Series:
        return self.frame["open"]

    @property
    def high(self) -> pd.Series:
        return self.frame["high"]

    @property
    def low(self) -> pd.Series:
        return self.frame["low"]

    @property
    def close(self) -> pd.Series:
        return self.frame["close"]

    def csv_frame(self) -> pd.DataFrame:
        """Records as ``date,open,high,low,close`` with formatted dates."""
        out = self.frame.copy()
        out.index = pd.Index(out.index.strftime("%Y-%m-%d"), name="date")
        return out.reset_index()

    def to_csv(self, path: str) -> None:
        self.csv_frame().to_csv(path, index=False)


@dataclass(frozen=True)
class ReturnSeries:
    """
    Log returns in ``scale`` units (100 means percent).

    Attributes:
        values (pd.Series): Returns indexed by date.
        scale (float): Multiplier applied to the natural-log returns.
    """

    values: pd.Series
    scale: float = DEFAULT_RETURN_SCALE

    def __post_init__(self):
        values = pd.Series(
            np.asarray(self.values, dtype=float),
            index=pd.DatetimeIndex(self.values.index, name="date"),
            name="value",
        )
        if not np.isfinite(values.to_numpy()).all():
            raise DataIntegrityError("return series contains non-finite values")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def dates(self) -> pd.DatetimeIndex:
        return self.values.index

    def to_numpy(self) -> np.ndarray:
        return self.values.to_numpy()

    def window(self, start: int, stop: int) -> "ReturnSeries":
        """Positional slice ``[start, stop)`` as a new series."""
        return ReturnSeries(self.values.iloc[start:stop], self.scale)

    def to_csv(self, path: str) -> None:
        write_value_csv(self.values, path)

    @classmethod
    def from_array(cls, values: np.ndarray, scale: float = DEFAULT_RETURN_SCALE,
                   start: str = "2000-01-03") -> "ReturnSeries":
        """Wrap a plain array with consecutive business-day dates."""
        dates = pd.bdate_range(start=start, periods=len(values), name="date")
        return cls(pd.Series(np.asarray(values, dtype=float), index=dates), scale)


@dataclass(frozen=True)
class StatsSummary:
    """
    Descriptive statistics of a return series.

    ``cv`` is absent when the mean is exactly zero; ``skewness`` and ``kurtosis``
    are absent when the standard deviation is zero. Kurtosis is the raw fourth
    standardized moment (3 for a normal sample).
    """

    count: int
    mean: float
    std: float
    cv: Optional[float]
    min: float
    max: float
    skewness: Optional[float]
    kurtosis: Optional[float]
    scale: float = field(default=DEFAULT_RETURN_SCALE)

    def to_frame(self) -> pd.DataFrame:
        rows = [
            ("count", self.count),
            ("mean", self.mean),
            ("std", self.std),
            ("cv", self.cv),
            ("min", self.min),
            ("max", self.max),
            ("skewness", self.skewness),
            ("kurtosis", self.kurtosis),
            ("scale", self.scale),
        ]
        return pd.DataFrame(rows, columns=["statistic", "value"])


def write_value_csv(values: pd.Series, path: str) -> None:
    """Write a dated series as ``date,value``; absent values are left empty."""
    out = pd.DataFrame({"date": values.index.strftime("%Y-%m-%d"), "value": values.to_numpy()})
    out.to_csv(path, index=False)


def load_ohlc_csv(path: str, schema: Optional[ColumnSchema] = None) -> PriceSeries:
    """
    Load OHLC records from a CSV file.

    Args:
        path (str): Location of the CSV file.
        schema (ColumnSchema, optional): Column mapping. Defaults to ``date,open,high,low,close``.

    Returns:
        PriceSeries: Records sorted by ascending date.

    Raises:
        FileNotFoundError: If the file does not exist.
        SchemaError: If a mapped column is missing.
        DataIntegrityError: If a date is unparseable or a record breaks an OHLC invariant;
            the message names the 1-based data row.
        DuplicateDateError: If a date appears twice.
    """
    schema = schema or ColumnSchema()
    if not os.path.exists(path):
        logger.error("File does not exist at the provided path: %s", path)
        raise FileNotFoundError(f"File does not exist at the provided path: {path}")

    logger.info(f"Reading OHLC records from {path}")
    raw = pd.read_csv(path)
    missing = [col for col in schema.as_mapping() if col not in raw.columns]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {missing}")

    frame = raw[list(schema.as_mapping())].rename(columns=schema.as_mapping())
    row_numbers = np.arange(1, len(frame) + 1)

    dates = pd.to_datetime(frame["date"], errors="coerce")
    if dates.isna().any():
        first = int(np.argmax(dates.isna().to_numpy()))
        raise DataIntegrityError(f"unparseable date {frame['date'].iloc[first]!r}", row=first + 1)
    for col in OHLC_COLUMNS:
        frame[col] = pd.to_numeric(frame[col], errors="coerce")
    _check_ohlc_rows(frame, row_numbers)

    frame.index = pd.DatetimeIndex(dates, name="date")
    if frame.index.has_duplicates:
        raise DuplicateDateError(frame.index[frame.index.duplicated()][0].date())

    frame = frame.drop(columns="date").sort_index(kind="mergesort")
    logger.info(f"Loaded {len(frame)} records from {frame.index[0].date()} to {frame.index[-1].date()}")
    return PriceSeries(frame)


def log_returns(prices: PriceSeries, scale: float = DEFAULT_RETURN_SCALE) -> ReturnSeries:
    """
    Close-to-close log returns ``scale * ln(C_t / C_{t-1})``.

    Args:
        prices (PriceSeries): At least two records.
        scale (float): Positive multiplier; 100 yields percent.

    Returns:
        ReturnSeries: One value per record after the first, dated by the later record.

    Raises:
        InsufficientDataError: If fewer than two records are given.
        DomainError: If ``scale`` is not positive.
    """
    if len(prices) < 2:
        raise InsufficientDataError(f"log returns need at least 2 prices, got {len(prices)}")
    if not scale > 0:
        raise DomainError(f"return scale must be positive, got {scale}")
    close = prices.close.to_numpy()
    values = scale * np.log(close[1:] / close[:-1])
    return ReturnSeries(pd.Series(values, index=prices.dates[1:]), scale)


def descriptive_stats(returns: ReturnSeries) -> StatsSummary:
    """
    Descriptive statistics of the returns, in whatever scale they carry.

    Args:
        returns (ReturnSeries): At least two observations.

    Returns:
        StatsSummary: Mean, population std, |std/mean|, extremes, moment skewness and raw kurtosis.

    Raises:
        InsufficientDataError: If fewer than two observations are given.
    """
    x = returns.to_numpy()
    if len(x) < 2:
        raise InsufficientDataError(f"descriptive statistics need at least 2 returns, got {len(x)}")

    mean = float(np.mean(x))
    std = float(np.std(x, ddof=0))
    cv = abs(std / mean) if mean != 0.0 else None
    if std > 0.0:
        skewness = float(stats.skew(x, bias=True))
        kurtosis = float(stats.kurtosis(x, fisher=False, bias=True))
    else:
        skewness = kurtosis = None

    return StatsSummary(
        count=len(x),
        mean=mean,
        std=std,
        cv=cv,
        min=float(np.min(x)),
        max=float(np.max(x)),
        skewness=skewness,
        kurtosis=kurtosis,
        scale=returns.scale,
    )
