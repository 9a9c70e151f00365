"""
Point-forecast accuracy: MSE, MAE, HMSE, the Diebold-Mariano test with the small-sample
correction, and the Mincer-Zarnowitz regression.
"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from ..utils import AlignmentError, DegenerateTestError, InsufficientDataError

SIGNIFICANCE = 0.05


@dataclass(frozen=True)
class TestResult:
    """
    Outcome of a statistical test.

    Attributes:
        statistic (float): Test statistic.
        p_value (float): p-value in [0, 1].
        reference (str): Reference distribution of the statistic.
        dof (float, optional): Degrees of freedom of the reference distribution.
        p_value_one_sided (float, optional): Reported alongside for tests with both forms.
        details (dict): Intermediate quantities.
    """

    __test__ = False

    statistic: float
    p_value: float
    reference: str
    dof: Optional[float] = None
    p_value_one_sided: Optional[float] = None
    details: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "p_value", float(min(max(self.p_value, 0.0), 1.0)))

    @property
    def rejected(self) -> bool:
        return self.p_value < SIGNIFICANCE

    @property
    def verdict(self) -> str:
        """``R`` when rejected at the 5% level, otherwise ``F`` (failed to reject)."""
        return "R" if self.rejected else "F"

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["verdict"] = self.verdict
        return out


@dataclass(frozen=True)
class PointMetrics:
    mse: float
    mae: float
    hmse: float
    n: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class MincerZarnowitz:
    beta0: float
    beta1: float
    r_squared: float
    n: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _paired(a: Sequence[float], b: Sequence[float], minimum: int, what: str):
    x = np.asarray(a, dtype=float).reshape(-1)
    y = np.asarray(b, dtype=float).reshape(-1)
    if x.shape != y.shape:
        raise AlignmentError(f"{what} needs equal lengths, got {len(x)} and {len(y)}")
    if len(x) < minimum:
        raise InsufficientDataError(f"{what} needs at least {minimum} observations, got {len(x)}")
    return x, y


def point_metrics(targets: Sequence[float], forecasts: Sequence[float],
                  dates: Optional[pd.DatetimeIndex] = None) -> PointMetrics:
    """
    MSE and MAE of the volatility forecasts, and HMSE ``mean((1 - forecast / target) ** 2)``.

    Raises:
        AlignmentError: If the lengths differ.
        ZeroDivisionError: If a target is zero; the message names its date or position.
    """
    y, f = _paired(targets, forecasts, 1, "point metrics")
    zero = y == 0.0
    if zero.any():
        first = int(np.argmax(zero))
        where = dates[first].date() if dates is not None else f"position {first}"
        raise ZeroDivisionError(f"HMSE is undefined for the zero target at {where}")
    e = y - f
    return PointMetrics(
        mse=float(np.mean(e * e)),
        mae=float(np.mean(np.abs(e))),
        hmse=float(np.mean((1.0 - f / y) ** 2)),
        n=len(y),
    )


def dm_test(errors_a: Sequence[float], errors_b: Sequence[float], horizon: int = 1) -> TestResult:
    """
    Diebold-Mariano test with the Harvey-Leybourne-Newbold correction.

    The loss differential is ``errors_a ** 2 - errors_b ** 2``. The one-sided p-value is the
    upper tail of Student's t with ``n - 1`` degrees of freedom, so a small value says model b
    (the second argument) is more accurate.

    Args:
        errors_a (sequence): Forecast errors of the reference model.
        errors_b (sequence): Forecast errors of the challenger.
        horizon (int): Forecast horizon; autocovariances up to ``horizon - 1`` enter the variance.

    Raises:
        InsufficientDataError: If fewer than 10 pairs are given.
        DegenerateTestError: If the differential is a non-zero constant.
    """
    a, b = _paired(errors_a, errors_b, 10, "DM test")
    if horizon < 1:
        raise ValueError(f"horizon must be positive, got {horizon}")
    n = len(a)
    d = a * a - b * b
    d_bar = float(np.mean(d))
    centered = d - d_bar
    lrv = float(np.dot(centered, centered) / n)
    for k in range(1, horizon):
        lrv += 2.0 * float(np.dot(centered[k:], centered[:-k]) / n)

    if lrv <= 0.0:
        if np.all(d == 0.0):
            return TestResult(0.0, 0.5, "t", dof=n - 1, details={"mean_differential": 0.0})
        raise DegenerateTestError("loss differential has zero variance but non-zero mean")

    correction = np.sqrt((n + 1 - 2 * horizon + horizon * (horizon - 1) / n) / n)
    statistic = d_bar / np.sqrt(lrv / n) * correction
    p_value = float(stats.t.sf(statistic, n - 1))
    return TestResult(
        float(statistic),
        p_value,
        "t",
        dof=n - 1,
        details={"mean_differential": d_bar, "long_run_variance": lrv, "correction": float(correction)},
    )


def mincer_zarnowitz(target_var: Sequence[float], forecast_var: Sequence[float]) -> MincerZarnowitz:
    """
    OLS of the realized variance on the forecast variance.

    Raises:
        InsufficientDataError: If fewer than 3 pairs are given.
        DegenerateTestError: If the regressor is constant.
    """
    y, f = _paired(target_var, forecast_var, 3, "Mincer-Zarnowitz regression")
    X = np.column_stack((np.ones_like(f), f))
    if np.linalg.matrix_rank(X) < 2:
        raise DegenerateTestError("Mincer-Zarnowitz regressor is constant (rank-deficient design)")
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    residuals = y - X @ coef
    ssr = float(residuals @ residuals)
    sst = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - ssr / sst if sst > 0.0 else 1.0
    return MincerZarnowitz(float(coef[0]), float(coef[1]), float(np.clip(r_squared, 0.0, 1.0)), len(y))
