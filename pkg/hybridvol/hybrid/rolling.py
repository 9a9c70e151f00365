"""
Rolling GARCH forecasts, the GRU feature matrix, and the block-wise hybrid run.
"""

import os
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from ..distributions import DistributionKind, DistributionSpec
from ..garch import FitOptions, GarchParams, GarchSpec, fit, forecast_one_step
from ..garch.recursions import default_h_init, filter_extended, mean_forecast
from ..gru import GruConfig, TrainingSet, predict, save_weights, train
from ..market_data import ReturnSeries, VolatilityEstimateSeries
from ..utils import (ConvergenceError, GruDivergenceError, InsufficientDataError,
                     NumericOverflowError, PipelineLogger, SchemaError)
from .plan import Block, RollingPlan

logger = PipelineLogger.get_logger(__name__)

FEATURE_COLUMNS = ("abs_return", "sigma_gkyz", "sigma_garch")
FORECAST_CSV_COLUMNS = ("r_f", "sigma_garch", "sigma_hybrid", "sigma_gkyz", "return", "nu", "xi")


@dataclass(frozen=True)
class GarchForecastSeries:
    """
    One-step GARCH forecasts indexed by the date they forecast.

    Attributes:
        frame (pd.DataFrame): Columns ``r_f, sigma_garch, nu, xi, converged, carried, repeated``.
            ``repeated`` marks dates whose carried parameters overflowed on the new window, so the
            previous forecast stands.
        spec (GarchSpec): Model the forecasts come from.
    """

    frame: pd.DataFrame
    spec: GarchSpec

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def carried(self) -> int:
        return int(self.frame["carried"].sum())

    @property
    def repeated(self) -> int:
        return int(self.frame["repeated"].sum())

    def distribution_at(self, date: pd.Timestamp) -> DistributionSpec:
        row = self.frame.loc[date]
        return distribution_from_shape(self.spec.distribution.kind, row["nu"], row["xi"])


def distribution_from_shape(kind: DistributionKind, nu: Optional[float], xi: Optional[float]) -> DistributionSpec:
    kind = DistributionKind(kind)
    if kind is DistributionKind.NORMAL:
        return DistributionSpec.normal()
    if kind is DistributionKind.STUDENT_T:
        return DistributionSpec.student_t(float(nu))
    return DistributionSpec.skew_student_t(float(nu), float(xi))


def _fit_window(spec: GarchSpec, window: ReturnSeries, options: FitOptions, clamp: bool) -> Dict[str, Any]:
    try:
        result = fit(spec, window, options)
        r_f, sigma_f = forecast_one_step(result, window, clamp=clamp)
    except (ConvergenceError, NumericOverflowError) as e:
        return {"ok": False, "error": str(e)}
    return {"ok": True, "params": result.params, "r_f": r_f, "sigma": sigma_f, "converged": result.converged}


def _carry_forward(spec: GarchSpec, params: GarchParams, window: ReturnSeries, clamp: bool) -> Dict[str, Any]:
    r = window.to_numpy()
    h_init = default_h_init(r)
    _, h = filter_extended(spec, params, r, h_init, window.dates)
    h_next = h[-1]
    if clamp:
        h_next = np.clip(h_next, h[:-1].min(), h[:-1].max())
    return {"ok": True, "params": params, "r_f": mean_forecast(spec, params, r), "sigma": float(np.sqrt(h_next)),
            "converged": False}


def rolling_garch_forecasts(
    spec: GarchSpec,
    returns: ReturnSeries,
    window: int,
    options: Optional[FitOptions] = None,
    threads: int = 1,
    clamp: bool = False,
) -> GarchForecastSeries:
    """
    Refit on every ``window``-day history and forecast the following day.

    The forecast for return index ``t`` uses returns ``[t - window, t)``. A window whose fit fails
    reuses the previous window's parameters on its own data; if those overflow on the new data the
    previous forecast is repeated. Both counts are logged.

    Args:
        spec (GarchSpec): Model to fit.
        returns (ReturnSeries): Full return history.
        window (int): Estimation window length.
        options (FitOptions, optional): Optimizer settings.
        threads (int): Parallel fit workers.
        clamp (bool): Bound forecasts by the window's fitted variance range.

    Returns:
        GarchForecastSeries: ``len(returns) - window`` forecasts.

    Raises:
        InsufficientDataError: If ``returns`` is not longer than ``window``.
        ConvergenceError: If the first window fails, so nothing can be carried forward.
    """
    n = len(returns)
    if n <= window:
        raise InsufficientDataError(f"rolling forecasts need more than {window} returns, got {n}")
    options = options or FitOptions(min_observations=min(window, FitOptions().min_observations))
    targets = range(window, n)
    logger.info(f"Fitting {len(targets)} rolling {spec.label} windows of {window} returns on {threads} worker(s)")

    results = Parallel(n_jobs=threads)(
        delayed(_fit_window)(spec, returns.window(t - window, t), options, clamp) for t in targets
    )

    rows = []
    previous: Optional[GarchParams] = None
    carried = 0
    repeated = 0
    for t, result in zip(targets, results):
        is_carried = is_repeated = False
        if not result["ok"]:
            if previous is None:
                logger.error(f"First rolling window failed and has no predecessor: {result['error']}")
                raise ConvergenceError(f"first rolling GARCH window failed: {result['error']}")
            logger.warning(f"GARCH fit for {returns.dates[t].date()} failed ({result['error']}); carrying forward")
            try:
                result = _carry_forward(spec, previous, returns.window(t - window, t), clamp)
            except NumericOverflowError as e:
                logger.warning(
                    f"Carried parameters overflow for {returns.dates[t].date()} ({e}); repeating the last forecast"
                )
                result = {"ok": True, "params": previous, "r_f": rows[-1]["r_f"], "sigma": rows[-1]["sigma_garch"],
                          "converged": False}
                repeated += 1
                is_repeated = True
            carried += 1
            is_carried = True
        previous = result["params"]
        rows.append(
            {
                "date": returns.dates[t],
                "r_f": result["r_f"],
                "sigma_garch": result["sigma"],
                "nu": previous.nu,
                "xi": previous.xi,
                "converged": result["converged"],
                "carried": is_carried,
                "repeated": is_repeated,
            }
        )

    frame = pd.DataFrame(rows).set_index("date")
    not_converged = int((~frame["converged"]).sum()) - carried
    if carried:
        logger.warning(f"{carried} of {len(frame)} GARCH windows carried forward the previous parameters")
    if repeated:
        logger.warning(f"{repeated} of {len(frame)} GARCH forecasts repeat the previous day after an overflow")
    if not_converged:
        logger.warning(f"{not_converged} of {len(frame)} GARCH fits ended without meeting the convergence criterion")
    logger.info(f"Produced {len(frame)} rolling GARCH forecasts")
    return GarchForecastSeries(frame, spec)


@dataclass(frozen=True)
class FeatureMatrix:
    """
    GRU inputs per day ``t`` and the next day's target and GARCH forecast.

    Attributes:
        frame (pd.DataFrame): Indexed by ``t``; feature columns ``abs_return, sigma_gkyz, sigma_garch``,
            ``target`` (next-day scaled GKYZ) and the next-day passthrough columns ``target_date,
            r_next, r_f_next, sigma_garch_next, nu_next, xi_next``.
        distribution_kind (DistributionKind): Innovation family of the GARCH forecasts.
        dropped (int): Candidate rows removed for an absent value.
    """

    frame: pd.DataFrame
    distribution_kind: DistributionKind = DistributionKind.NORMAL
    dropped: int = 0

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def features(self) -> np.ndarray:
        return self.frame[list(FEATURE_COLUMNS)].to_numpy(dtype=float)

    @property
    def targets(self) -> np.ndarray:
        return self.frame["target"].to_numpy(dtype=float)

    def windows(self, end_rows: np.ndarray, length: int) -> np.ndarray:
        """Feature windows of ``length`` rows ending at each of ``end_rows``."""
        end_rows = np.asarray(end_rows, dtype=int)
        if len(end_rows) and end_rows.min() < length - 1:
            raise InsufficientDataError(f"row {end_rows.min()} has fewer than {length - 1} predecessors")
        view = np.lib.stride_tricks.sliding_window_view(self.features, (length, len(FEATURE_COLUMNS)))[:, 0]
        return np.ascontiguousarray(view[end_rows - length + 1])


def build_features(
    returns: ReturnSeries,
    gkyz_scaled: VolatilityEstimateSeries,
    garch_forecasts: GarchForecastSeries,
) -> FeatureMatrix:
    """
    Align absolute returns, scaled GKYZ and GARCH forecasts by date.

    Row ``t`` holds ``|r_t|``, the GKYZ estimate of ``t`` and the GARCH forecast for ``t`` made
    with data through ``t - 1``; its target is the GKYZ estimate of ``t + 1``. Candidate rows are the
    days that have a GARCH forecast and a following day; those missing any value are dropped.

    Raises:
        InsufficientDataError: If no row survives.
    """
    dates = returns.dates
    garch = garch_forecasts.frame.reindex(dates)
    frame = pd.DataFrame(
        {
            "abs_return": np.abs(returns.to_numpy()),
            "sigma_gkyz": gkyz_scaled.values.reindex(dates).to_numpy(),
            "sigma_garch": garch["sigma_garch"].to_numpy(),
        },
        index=dates,
    )
    frame["target"] = frame["sigma_gkyz"].shift(-1)
    frame["target_date"] = pd.Series(dates, index=dates).shift(-1)
    frame["r_next"] = returns.values.shift(-1)
    frame["r_f_next"] = garch["r_f"].shift(-1)
    frame["sigma_garch_next"] = garch["sigma_garch"].shift(-1)
    frame["nu_next"] = garch["nu"].shift(-1)
    frame["xi_next"] = garch["xi"].shift(-1)

    candidates = frame[frame["sigma_garch"].notna() & frame["target_date"].notna()]
    required = list(FEATURE_COLUMNS) + ["target", "r_f_next", "sigma_garch_next"]
    kept = candidates.dropna(subset=required)
    dropped = len(candidates) - len(kept)
    if kept.empty:
        raise InsufficientDataError("returns, GKYZ estimates and GARCH forecasts share no complete day")
    if dropped:
        logger.warning(f"Dropped {dropped} feature rows with an absent value")
    logger.info(f"Built {len(kept)} feature rows from {kept.index[0].date()} to {kept.index[-1].date()}")
    return FeatureMatrix(kept.copy(), garch_forecasts.spec.distribution.kind, dropped)


@dataclass(frozen=True)
class ForecastRecord:
    """
    Forecasts and outcome for one evaluated day.

    Attributes:
        date (pd.Timestamp): Forecast day.
        r_f (float): GARCH return forecast.
        sigma_garch (float): GARCH volatility forecast.
        sigma_hybrid (float): GRU volatility forecast, floored at 0.
        sigma_gkyz (float): Realized scaled GKYZ volatility.
        realized_return (float): Return of the day.
        distribution (DistributionSpec): Innovation distribution of the GARCH fit behind ``r_f``.
        block (int): GRU block that produced ``sigma_hybrid``.
    """

    date: pd.Timestamp
    r_f: float
    sigma_garch: float
    sigma_hybrid: float
    sigma_gkyz: float
    realized_return: float
    distribution: DistributionSpec = field(default_factory=DistributionSpec)
    block: int = 0


@dataclass
class HybridResult:
    """Records of the completed blocks plus run diagnostics; ``failure`` is set when a block diverged."""

    records: List[ForecastRecord] = field(default_factory=list)
    blocks: List[Block] = field(default_factory=list)
    best_epochs: List[int] = field(default_factory=list)
    floored: int = 0
    failure: Optional[GruDivergenceError] = None
    failed_block: Optional[int] = None

    @property
    def complete(self) -> bool:
        return self.failure is None


def _block_sets(plan: RollingPlan, features: FeatureMatrix, block: Block, length: int):
    ends = np.arange(max(block.train_start, length - 1), block.train_stop)
    split = block.train_stop - plan.validation_size
    train_ends, val_ends = ends[ends < split], ends[ends >= split]
    if len(train_ends) == 0 or len(val_ends) == 0:
        raise InsufficientDataError(
            f"block {block.index} has {len(train_ends)} training and {len(val_ends)} validation windows"
        )
    y = features.targets
    return (
        TrainingSet(features.windows(train_ends, length), y[train_ends]),
        TrainingSet(features.windows(val_ends, length), y[val_ends]),
        np.arange(block.test_start, block.test_stop),
    )


def run_hybrid(
    plan: RollingPlan,
    config: GruConfig,
    features: FeatureMatrix,
    weights_dir: Optional[str] = None,
) -> HybridResult:
    """
    Train one GRU per block and forecast the block's test rows.

    Each block trains on its chronological training rows, holding out the tail as validation,
    with seed ``config.seed + block index``. Negative outputs are floored at 0 and counted.

    Args:
        plan (RollingPlan): Block layout.
        config (GruConfig): Network configuration.
        features (FeatureMatrix): Aligned features.
        weights_dir (str, optional): Directory receiving ``gru_block_<k>.npz`` archives.

    Returns:
        HybridResult: Records in date order. If a block diverges, the records of the earlier
        blocks are kept and ``failure`` is set.

    Raises:
        InsufficientDataError: If no block fits in the feature matrix.
    """
    blocks = plan.require_blocks(len(features))
    length = config.sequence_length
    frame = features.frame
    result = HybridResult(blocks=blocks)
    logger.info(f"Running {len(blocks)} GRU blocks over {len(features)} feature rows")

    for block in blocks:
        block_config = replace(config, seed=config.seed + block.index)
        data, validation, test_rows = _block_sets(plan, features, block, length)
        logger.info(
            f"Block {block.index}: {len(data)} training, {len(validation)} validation and {len(test_rows)} test windows"
        )
        try:
            weights, history = train(block_config, data, validation)
        except GruDivergenceError as e:
            logger.error(f"Block {block.index} diverged: {e}")
            result.failure = e
            result.failed_block = block.index
            break
        result.best_epochs.append(history.best_epoch)
        if weights_dir is not None:
            os.makedirs(weights_dir, exist_ok=True)
            save_weights(weights, block_config, os.path.join(weights_dir, f"gru_block_{block.index}.npz"))

        raw = predict(weights, block_config, features.windows(test_rows, length)).astype(float)
        negative = raw < 0.0
        if negative.any():
            logger.warning(f"Block {block.index}: floored {int(negative.sum())} negative GRU outputs at 0")
            result.floored += int(negative.sum())
        sigma_hybrid = np.where(negative, 0.0, raw)

        rows = frame.iloc[test_rows]
        for row, value in zip(rows.itertuples(index=False), sigma_hybrid):
            result.records.append(
                ForecastRecord(
                    date=row.target_date,
                    r_f=float(row.r_f_next),
                    sigma_garch=float(row.sigma_garch_next),
                    sigma_hybrid=float(value),
                    sigma_gkyz=float(row.target),
                    realized_return=float(row.r_next),
                    distribution=distribution_from_shape(features.distribution_kind, row.nu_next, row.xi_next),
                    block=block.index,
                )
            )

    logger.info(f"Hybrid run produced {len(result.records)} forecasts ({result.floored} floored)")
    return result


def records_to_frame(records: List[ForecastRecord]) -> pd.DataFrame:
    """Records as a frame indexed by date with the forecast CSV columns."""
    frame = pd.DataFrame(
        {
            "r_f": [rec.r_f for rec in records],
            "sigma_garch": [rec.sigma_garch for rec in records],
            "sigma_hybrid": [rec.sigma_hybrid for rec in records],
            "sigma_gkyz": [rec.sigma_gkyz for rec in records],
            "return": [rec.realized_return for rec in records],
            "nu": [rec.distribution.nu for rec in records],
            "xi": [rec.distribution.xi for rec in records],
        },
        index=pd.DatetimeIndex([rec.date for rec in records], name="date"),
    )
    return frame


def forecasts_csv_frame(records: List[ForecastRecord]) -> pd.DataFrame:
    """Records in the forecasts CSV layout: a formatted ``date`` column, then the forecast columns."""
    frame = records_to_frame(records)
    frame.index = pd.Index(frame.index.strftime("%Y-%m-%d"), name="date")
    return frame.reset_index()


def write_forecasts_csv(records: List[ForecastRecord], path: str) -> None:
    forecasts_csv_frame(records).to_csv(path, index=False)


def read_forecasts_csv(path: str, kind: DistributionKind) -> List[ForecastRecord]:
    """
    Records from a forecasts CSV written by ``write_forecasts_csv``.

    Raises:
        FileNotFoundError: If the file does not exist.
        SchemaError: If a column is missing.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"File does not exist at the provided path: {path}")
    frame = pd.read_csv(path, parse_dates=["date"], float_precision="round_trip")
    missing = [col for col in ("date",) + FORECAST_CSV_COLUMNS if col not in frame.columns]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {missing}")
    frame = frame.rename(columns={"return": "realized_return"})
    return [
        ForecastRecord(
            date=row.date,
            r_f=float(row.r_f),
            sigma_garch=float(row.sigma_garch),
            sigma_hybrid=float(row.sigma_hybrid),
            sigma_gkyz=float(row.sigma_gkyz),
            realized_return=float(row.realized_return),
            distribution=distribution_from_shape(kind, row.nu, row.xi),
        )
        for row in frame.itertuples(index=False)
    ]
