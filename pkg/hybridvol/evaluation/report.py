"""
Backtest reports: point accuracy, forecast-comparison and regression statistics, VaR coverage
tests and the ES test, as a JSON document and as a console table.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..hybrid import ForecastRecord
from ..risk import hit_sequence, risk_forecasts
from ..risk.measures import SOURCES
from ..utils import DegenerateTestError, DomainError, InsufficientExceedancesError, PipelineLogger
from .coverage_tests import christoffersen_test, kupiec_test, mcneil_frey_test
from .metrics import MincerZarnowitz, PointMetrics, TestResult, dm_test, mincer_zarnowitz, point_metrics

logger = PipelineLogger.get_logger(__name__)


def format_hit_ratio(x: int, n: int) -> str:
    """Percentage truncated to two decimals: 59 of 1194 gives ``4.94%``."""
    return f"{(10000 * x // n) / 100:.2f}%"


def expected_count(alpha: float, n: int) -> Dict[str, Any]:
    value = round(alpha * n, 4)
    return {"value": value, "floor": math.floor(value), "ceil": math.ceil(value)}


def format_expected_count(alpha: float, n: int) -> str:
    """``alpha * n`` with its integer bracket: ``59.7 [59, 60]``."""
    count = expected_count(alpha, n)
    return f"{count['value']:g} [{count['floor']}, {count['ceil']}]"


@dataclass(frozen=True)
class CoverageResult:
    alpha: float
    n: int
    exceedances: int
    kupiec: TestResult
    christoffersen: TestResult

    @property
    def hit_ratio(self) -> str:
        return format_hit_ratio(self.exceedances, self.n)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha,
            "exceedances": self.exceedances,
            "expected": expected_count(self.alpha, self.n),
            "hit_ratio": self.exceedances / self.n,
            "hit_ratio_display": self.hit_ratio,
            "kupiec": self.kupiec.to_dict(),
            "christoffersen": self.christoffersen.to_dict(),
        }


@dataclass(frozen=True)
class BacktestReport:
    """
    Every statistic of one model's forecasts over the evaluation period.

    ``dm`` compares against the GARCH baseline and is absent for the baseline itself;
    ``mincer_zarnowitz`` and the ES tests are absent when undefined for the data, with the reason
    recorded in ``notes``.
    """

    asset: str
    model: str
    source: str
    n: int
    start: str
    end: str
    metrics: PointMetrics
    coverage: List[CoverageResult]
    es_alpha: float
    dm: Optional[TestResult] = None
    mincer_zarnowitz: Optional[MincerZarnowitz] = None
    es_exact: Optional[TestResult] = None
    es_bootstrap: Optional[TestResult] = None
    notes: List[str] = field(default_factory=list)

    def coverage_at(self, alpha: float) -> Optional[CoverageResult]:
        return next((c for c in self.coverage if math.isclose(c.alpha, alpha)), None)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "asset": self.asset,
            "model": self.model,
            "source": self.source,
            "n": self.n,
            "period": [self.start, self.end],
            "metrics": self.metrics.to_dict(),
            "dm_vs_garch": self.dm.to_dict() if self.dm else None,
            "mincer_zarnowitz": self.mincer_zarnowitz.to_dict() if self.mincer_zarnowitz else None,
            "coverage": [c.to_dict() for c in self.coverage],
            "expected_shortfall": {
                "alpha": self.es_alpha,
                "exact": self.es_exact.to_dict() if self.es_exact else None,
                "bootstrap": self.es_bootstrap.to_dict() if self.es_bootstrap else None,
            },
            "notes": list(self.notes),
        }

    def to_table(self) -> str:
        """Detail rows in the layout of a results table, one statistic per line."""
        label = f"{self.model} ({self.source})"
        rows = [
            ("MSE", f"{self.metrics.mse:.6f}"),
            ("MAE", f"{self.metrics.mae:.6f}"),
            ("HMSE", f"{self.metrics.hmse:.6f}"),
            ("R2", f"{self.mincer_zarnowitz.r_squared:.4f}" if self.mincer_zarnowitz else "n/a"),
        ]
        if self.dm is not None:
            rows.append(("DM p-value vs GARCH", f"{self.dm.p_value:.4f}({self.dm.verdict})"))
        for c in self.coverage:
            pct = f"{c.alpha * 100:g}%"
            rows.append((f"VaR exceedances {pct}", f"{c.exceedances} of {c.n}, expected {format_expected_count(c.alpha, c.n)}"))
            rows.append((f"Hit ratio {pct}", c.hit_ratio))
            rows.append((f"Kupiec p-value {pct}", f"{c.kupiec.p_value:.4f}({c.kupiec.verdict})"))
            rows.append((f"Christoffersen p-value {pct}", f"{c.christoffersen.p_value:.4f}({c.christoffersen.verdict})"))
        es_pct = f"{self.es_alpha * 100:g}%"
        for name, result in (("bootstrap", self.es_bootstrap), ("sample", self.es_exact)):
            value = f"{result.p_value:.4f}({result.verdict})" if result else "n/a"
            rows.append((f"ES {es_pct} p-value ({name})", value))
        width = max(len(name) for name, _ in rows)
        lines = [f"{self.asset}: {label}, {self.n} forecasts {self.start} to {self.end}"]
        lines += [f"  {name.ljust(width)}  {value}" for name, value in rows]
        for note in self.notes:
            lines.append(f"  note: {note}")
        return "\n".join(lines)


def _sigma(records: Sequence[ForecastRecord], source: str) -> np.ndarray:
    attr = "sigma_garch" if source == "garch" else "sigma_hybrid"
    return np.array([getattr(rec, attr) for rec in records], dtype=float)


def build_report(
    records: Sequence[ForecastRecord],
    source: str,
    alphas: Sequence[float] = (0.05, 0.01),
    es_alpha: float = 0.05,
    bootstrap_b: int = 10000,
    seed: int = 0,
    asset: str = "asset",
    model: str = "GARCH",
) -> BacktestReport:
    """
    Evaluate one forecast source over the records.

    Args:
        records (sequence): Forecast records in date order.
        source (str): ``garch`` or ``hybrid``.
        alphas (sequence): VaR tolerance levels for the coverage tests.
        es_alpha (float): Tolerance level of the ES test.
        bootstrap_b (int): Bootstrap resamples of the ES test.
        seed (int): Bootstrap seed.
        asset (str): Asset label.
        model (str): Model label.

    Returns:
        BacktestReport: Report; for ``hybrid`` the DM test compares against the GARCH forecasts.
    """
    if source not in SOURCES:
        raise DomainError(f"report source must be one of {SOURCES}, got {source!r}")
    if not records:
        raise DomainError("a report needs at least one forecast")
    dates = pd.DatetimeIndex([rec.date for rec in records])
    target = np.array([rec.sigma_gkyz for rec in records], dtype=float)
    realized = np.array([rec.realized_return for rec in records], dtype=float)
    sigma = _sigma(records, source)
    notes: List[str] = []

    metrics = point_metrics(target, sigma, dates)

    dm = None
    if source == "hybrid":
        try:
            dm = dm_test(target - _sigma(records, "garch"), target - sigma)
        except DegenerateTestError as e:
            notes.append(f"DM test undefined: {e}")

    try:
        mz = mincer_zarnowitz(target ** 2, sigma ** 2)
    except DegenerateTestError as e:
        mz = None
        notes.append(f"Mincer-Zarnowitz regression undefined: {e}")

    coverage = []
    for alpha in alphas:
        var = np.array([f.var for f in risk_forecasts(records, source, alpha)])
        hits = hit_sequence(realized, var, alpha)
        coverage.append(
            CoverageResult(alpha, len(hits), hits.count, kupiec_test(hits, alpha), christoffersen_test(hits, alpha))
        )

    es_forecasts = risk_forecasts(records, source, es_alpha)
    es_var = np.array([f.var for f in es_forecasts])
    es_values = np.array([f.es for f in es_forecasts])
    es_hits = hit_sequence(realized, es_var, es_alpha)
    try:
        es_exact, es_bootstrap = mcneil_frey_test(realized, sigma, es_values, es_hits, bootstrap_b, seed)
    except InsufficientExceedancesError as e:
        es_exact = es_bootstrap = None
        notes.append(f"ES test undefined: {e}")

    for note in notes:
        logger.warning(f"{model} ({source}): {note}")
    return BacktestReport(
        asset=asset,
        model=model,
        source=source,
        n=len(records),
        start=dates[0].strftime("%Y-%m-%d"),
        end=dates[-1].strftime("%Y-%m-%d"),
        metrics=metrics,
        coverage=coverage,
        es_alpha=es_alpha,
        dm=dm,
        mincer_zarnowitz=mz,
        es_exact=es_exact,
        es_bootstrap=es_bootstrap,
        notes=notes,
    )


def _finite(value: Any) -> Any:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_finite(v) for v in value]
    return value


def reports_document(reports: Sequence[BacktestReport], extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """JSON-ready document of the reports keyed by source; it depends only on the report contents."""
    document: Dict[str, Any] = _finite(dict(extra or {}))
    document["reports"] = {report.source: _finite(report.to_dict()) for report in reports}
    return document
