"""
One-day Value-at-Risk and Expected Shortfall of a long position, and exceedance sequences.

VaR is a positive loss magnitude ``-r_f - sigma * q_alpha``; ES is a return level
``r_f + sigma * E(z | z < q_alpha)``. A day is an exceedance when its return falls strictly
below ``-VaR``.
"""

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from ..distributions import DistributionSpec, quantile, tail_expectation
from ..utils import AlignmentError, DomainError
from ..hybrid import ForecastRecord

SOURCES = ("garch", "hybrid")


@dataclass(frozen=True)
class RiskForecast:
    date: pd.Timestamp
    alpha: float
    var: float
    es: float
    source: str = "garch"


@dataclass(frozen=True)
class HitSequence:
    """
    Exceedance indicators in forecast order.

    Attributes:
        values (np.ndarray): 0/1 indicators.
        alpha (float): Tolerance level of the VaR they were computed against.
        dates (pd.DatetimeIndex, optional): Forecast dates.
    """

    values: np.ndarray
    alpha: float
    dates: Optional[pd.DatetimeIndex] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=int)
        if not np.isin(values, (0, 1)).all():
            raise DomainError("hit indicators must be 0 or 1")
        object.__setattr__(self, "values", values)
        if self.dates is not None and len(self.dates) != len(values):
            raise AlignmentError(f"{len(values)} hits but {len(self.dates)} dates")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def count(self) -> int:
        return int(self.values.sum())

    @property
    def ratio(self) -> float:
        return self.count / len(self.values) if len(self.values) else float("nan")


def _check_sigma(sigma_f) -> None:
    if np.any(np.asarray(sigma_f) < 0.0):
        raise DomainError(f"volatility forecast must be nonnegative, got {sigma_f}")


def var_forecast(r_f, sigma_f, dist: DistributionSpec, alpha: float):
    """
    Value-at-Risk ``-r_f - sigma_f * q_alpha``.

    Raises:
        DomainError: If ``alpha`` is outside (0, 1) or ``sigma_f`` is negative.
    """
    _check_sigma(sigma_f)
    value = -np.asarray(r_f, dtype=float) - np.asarray(sigma_f, dtype=float) * quantile(dist, alpha)
    return float(value) if np.ndim(value) == 0 else value


def es_forecast(r_f, sigma_f, dist: DistributionSpec, alpha: float):
    """
    Expected Shortfall as a return level, ``r_f + sigma_f * E(z | z < q_alpha)``.

    Raises:
        DomainError: If ``alpha`` is outside (0, 1) or ``sigma_f`` is negative.
    """
    _check_sigma(sigma_f)
    value = np.asarray(r_f, dtype=float) + np.asarray(sigma_f, dtype=float) * tail_expectation(dist, alpha)
    return float(value) if np.ndim(value) == 0 else value


def hit_sequence(
    returns: Union[pd.Series, Sequence[float]],
    var_series: Union[pd.Series, Sequence[float]],
    alpha: float,
) -> HitSequence:
    """
    Indicators ``r_t < -VaR_t``.

    Args:
        returns: Realized returns; a dated series must share its index with ``var_series``.
        var_series: VaR forecasts as positive loss magnitudes.
        alpha (float): Tolerance level of the VaR.

    Raises:
        AlignmentError: If the lengths or dates differ.
    """
    dates = None
    if isinstance(returns, pd.Series) and isinstance(var_series, pd.Series):
        if not returns.index.equals(var_series.index):
            raise AlignmentError("returns and VaR forecasts are not aligned on the same dates")
        dates = pd.DatetimeIndex(returns.index)
    r = np.asarray(returns, dtype=float)
    v = np.asarray(var_series, dtype=float)
    if r.shape != v.shape:
        raise AlignmentError(f"{len(r)} returns but {len(v)} VaR forecasts")
    return HitSequence((r < -v).astype(int), alpha, dates)


def _sigma(record: ForecastRecord, source: str) -> float:
    if source not in SOURCES:
        raise DomainError(f"risk source must be one of {SOURCES}, got {source!r}")
    return record.sigma_garch if source == "garch" else record.sigma_hybrid


def risk_forecasts(records: Iterable[ForecastRecord], source: str, alpha: float) -> List[RiskForecast]:
    """VaR and ES of every record at one tolerance level, using each record's own distribution."""
    out = []
    for rec in records:
        sigma = _sigma(rec, source)
        out.append(
            RiskForecast(
                date=rec.date,
                alpha=alpha,
                var=var_forecast(rec.r_f, sigma, rec.distribution, alpha),
                es=es_forecast(rec.r_f, sigma, rec.distribution, alpha),
                source=source,
            )
        )
    return out


def risk_frame(records: Sequence[ForecastRecord], source: str, alphas: Sequence[float]) -> pd.DataFrame:
    """
    Risk series with columns ``date, alpha, var, es, hit`` sorted by alpha, then date.
    """
    realized = np.array([rec.realized_return for rec in records], dtype=float)
    parts = []
    for alpha in alphas:
        forecasts = risk_forecasts(records, source, alpha)
        var = np.array([f.var for f in forecasts])
        hits = hit_sequence(realized, var, alpha)
        parts.append(
            pd.DataFrame(
                {
                    "date": pd.DatetimeIndex([f.date for f in forecasts]),
                    "alpha": alpha,
                    "var": var,
                    "es": [f.es for f in forecasts],
                    "hit": hits.values,
                }
            )
        )
    return pd.concat(parts, ignore_index=True)


def risk_csv_frame(frame: pd.DataFrame) -> pd.DataFrame:
    out = frame.copy()
    out["date"] = pd.DatetimeIndex(out["date"]).strftime("%Y-%m-%d")
    return out[["date", "alpha", "var", "es", "hit"]]


def write_risk_csv(frame: pd.DataFrame, path: str) -> None:
    risk_csv_frame(frame).to_csv(path, index=False)
